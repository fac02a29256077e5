// Embeds the Image Segmentation data in two dimensions with PCA and two GP
// methods, then prints held-out metrics and the evolved expressions.
//
//   embed_segmentation [path/to/segmentation.csv] [seed]

#include <cctype>
#include <cstdlib>
#include <iostream>

#include "gpdr/experiment.hpp"

#ifndef GPDR_DATA_DIR
#define GPDR_DATA_DIR "data"
#endif

int main(int argc, char** argv) {
    using namespace gpdr;
    ExperimentConfig cfg;
    cfg.dataset_path = argc > 1 ? argv[1] : GPDR_DATA_DIR "/segmentation.csv";
    cfg.master_seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    cfg.apply_desk_scale();
    cfg.eval.forest.trees = 50;
    try {
        const Dataset data = load_csv(cfg.dataset_path, LabelColumn{cfg.label_column});
        // Names like "exred-mean" would read as subtractions.
        std::vector<std::string> names = data.feature_names;
        for (auto& n : names)
            for (char& c : n)
                if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
        std::cout << data.n() << " rows, " << data.p() << " features, " << data.class_count << " classes\n\n";
        for (Method m : {Method::Pca, Method::MtRankEuclidean, Method::AmtGp}) {
            const RunRecord r = run_single(cfg, data, m, 2, 0);
            std::cout << method_name(m) << ": ";
            if (!r.ok) {
                std::cout << "failed: " << r.error << "\n\n";
                continue;
            }
            std::cout << "balanced accuracy " << r.balanced_accuracy << ", reconstruction error "
                      << r.reconstruction_error << '\n';
            for (std::size_t j = 0; j < r.expressions.size(); ++j) {
                const gp::Tree t = gp::parse_infix(r.expressions[j], r.input_dims);
                std::cout << "  X~" << j + 1 << " = " << gp::to_infix(t, names, 3) << '\n';
            }
            std::cout << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "embed_segmentation: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
