#include "rfddl/inference.hpp"

#include "rfddl/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace rfddl;

namespace {

RfddlModel toy_model(Eigen::Index n, Eigen::Index k, int c, std::uint64_t seed) {
    RfddlModel model;
    model.dictionary = oracles::random_matrix(n, k, seed);
    model.codes = oracles::random_matrix(k, 12, seed + 1);
    std::vector<int> atom_labels(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i)
        atom_labels[static_cast<std::size_t>(i)] = static_cast<int>(i) % c;
    model.atom_labels = atom_labels;
    model.laplacian = build_atom_graph(model.dictionary, atom_labels,
                                       std::min<int>(3, static_cast<int>(k) - 1))
                          .laplacian;
    model.classifier = oracles::random_matrix(c, k, seed + 2);
    return model;
}

struct TrainedSetup {
    LabeledDataset train;
    LabeledDataset test;
    RfddlModel model;
};

TrainedSetup trained_on_blobs(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.num_classes = 3;
    spec.dim = 16;
    spec.samples_per_class = 40;
    spec.centroid_separation = 10.0;
    spec.within_class_std = 1.0;
    spec.seed = seed;
    const LabeledDataset ds = synth_blobs(spec);
    auto [train_set, test_set] = split_per_class(ds, 20, seed + 1);
    Hyperparams hp;
    hp.beta = 1e6;  // code-consistency weight strong enough for ridge-code transfer
    hp.atoms_per_class = 4;
    hp.seed = seed + 2;
    TrainedSetup setup{std::move(train_set), std::move(test_set), {}};
    setup.model = train(setup.train, hp).model;
    return setup;
}

}  // namespace

TEST_CASE("codes by reconstruction") {
    SUBCASE("identity dictionary halves the input") {
        RfddlModel model = toy_model(4, 4, 2, 5);
        model.dictionary = Matrix::Identity(4, 4);
        const Matrix x = oracles::random_matrix(4, 6, 7);
        const Matrix codes = codes_by_reconstruction(model, x);
        CHECK((codes - 0.5 * x).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("zero input gives zero codes") {
        const RfddlModel model = toy_model(5, 3, 3, 9);
        const Matrix codes = codes_by_reconstruction(model, Matrix::Zero(5, 4));
        CHECK(codes.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("matches a descent oracle on the coding objective") {
        const RfddlModel model = toy_model(8, 5, 2, 11);
        const Matrix x = oracles::random_matrix(8, 6, 13);
        const Matrix codes = codes_by_reconstruction(model, x);
        const Matrix he = oracles::centering_matrix(6);
        const auto coding_objective = [&](const Matrix& s) {
            return ((x - model.dictionary * s) * he).squaredNorm() + (s * he).squaredNorm();
        };
        // Steepest descent with an exact quadratic line search, driven purely
        // by objective evaluations through finite differences.
        Matrix s = Matrix::Zero(5, 6);
        for (int it = 0; it < 400; ++it) {
            const Matrix grad = oracles::fd_gradient(coding_objective, s);
            const double g2 = grad.squaredNorm();
            if (g2 < 1e-18) break;
            const double f0 = coding_objective(s);
            const double t = 1e-3;
            const double ft = coding_objective(s - t * grad);
            // Quadratic through f(0), f'(0) = -g2, f(t): exact minimizer.
            const double curv = 2.0 * (ft - f0 + t * g2) / (t * t);
            const double step = curv > 0.0 ? g2 / curv : t;
            s -= step * grad;
        }
        const double by_oracle = coding_objective(s);
        const double by_solver = coding_objective(codes);
        CHECK(by_solver <= by_oracle * (1.0 + 1e-8) + 1e-10);
        CHECK(std::abs(by_solver - by_oracle) <= 1e-6 * (1.0 + by_oracle));
    }
    SUBCASE("column separability: batch equals per-sample") {
        const RfddlModel model = toy_model(7, 4, 2, 15);
        const Matrix x = oracles::random_matrix(7, 5, 17);
        const Matrix batch = codes_by_reconstruction(model, x);
        for (Eigen::Index j = 0; j < 5; ++j) {
            const Matrix single = codes_by_reconstruction(model, x.col(j));
            CHECK((batch.col(j) - single.col(0)).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    SUBCASE("dimension mismatch rejected") {
        const RfddlModel model = toy_model(6, 4, 2, 19);
        CHECK_THROWS_AS(codes_by_reconstruction(model, Matrix::Zero(5, 2)), InputError);
    }
}

TEST_CASE("code extractor") {
    SUBCASE("identity graph halves the ridge regression") {
        RfddlModel model = toy_model(6, 4, 2, 21);
        model.laplacian = Matrix::Identity(4, 4);
        const Matrix x = oracles::random_matrix(6, 12, 23);
        model.codes = oracles::random_matrix(4, 12, 25);
        const CodeExtractor ext = learn_code_extractor(model, x);
        Matrix gram = x * x.transpose();
        const double ridge = model.params.jitter * gram.trace() / 6.0;
        gram.diagonal().array() += ridge;
        const Matrix expected =
            0.5 * gram.ldlt().solve(x * model.codes.transpose()).transpose();
        CHECK((ext.projection - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("zero codes give a zero extractor") {
        RfddlModel model = toy_model(6, 4, 2, 27);
        model.codes = Matrix::Zero(4, 12);
        const Matrix x = oracles::random_matrix(6, 12, 29);
        const CodeExtractor ext = learn_code_extractor(model, x);
        CHECK(ext.projection.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("beats any planted projection on the embedding objective") {
        RfddlModel model = toy_model(6, 4, 2, 31);
        const Matrix planted = oracles::random_matrix(4, 6, 33);
        const Matrix x = oracles::random_matrix(6, 12, 35);
        model.codes = model.laplacian * planted * x;  // exactly realizable
        const CodeExtractor ext = learn_code_extractor(model, x);
        const auto embed_objective = [&](const Matrix& g) {
            return (model.laplacian * g * x - model.codes).squaredNorm() + (g * x).squaredNorm();
        };
        CHECK(embed_objective(ext.projection) <=
              embed_objective(planted) * (1.0 + 1e-6) + 1e-9);
    }
    SUBCASE("satisfies its own normal equations") {
        RfddlModel model = toy_model(7, 5, 2, 37);
        const Matrix x = oracles::random_matrix(7, 12, 39);
        model.codes = oracles::random_matrix(5, 12, 41);
        const CodeExtractor ext = learn_code_extractor(model, x);
        const Matrix& lap = model.laplacian;
        Matrix left = lap.transpose() * lap;
        left += Matrix::Identity(5, 5);
        Matrix gram = x * x.transpose();
        gram.diagonal().array() += model.params.jitter * (x * x.transpose()).trace() / 7.0;
        const Matrix lhs = left * ext.projection * gram;
        const Matrix rhs = lap.transpose() * model.codes * x.transpose();
        CHECK((lhs - rhs).norm() / rhs.norm() < 1e-8);
    }
}

TEST_CASE("prediction from codes") {
    SUBCASE("one-hot classifier rows read off code entries") {
        RfddlModel model = toy_model(4, 5, 3, 43);
        model.classifier = Matrix::Zero(3, 5);
        model.classifier(0, 1) = 1.0;
        model.classifier(1, 3) = 1.0;
        model.classifier(2, 4) = 1.0;
        Matrix codes(5, 2);
        codes << 0, 0, 5, 1, 0, 0, 2, 9, 1, 3;
        const Prediction pred = predict_from_codes(model, codes);
        CHECK(pred.hard == std::vector<int>{0, 1});
    }
    SUBCASE("positive scaling leaves hard labels unchanged") {
        const RfddlModel model = toy_model(4, 5, 3, 45);
        const Matrix codes = oracles::random_matrix(5, 20, 47);
        const Prediction a = predict_from_codes(model, codes);
        const Prediction b = predict_from_codes(model, 3.0 * codes);
        CHECK(a.hard == b.hard);
    }
    SUBCASE("exact ties pick the lower class index") {
        RfddlModel model = toy_model(4, 2, 3, 49);
        model.classifier = Matrix::Zero(3, 2);
        model.classifier(1, 0) = 1.0;
        model.classifier(2, 0) = 1.0;  // classes 1 and 2 score identically
        Matrix codes(2, 1);
        codes << 2.0, 0.0;
        const Prediction pred = predict_from_codes(model, codes);
        CHECK(pred.hard == std::vector<int>{1});
    }
}

TEST_CASE("end-to-end classification schemes") {
    const TrainedSetup setup = trained_on_blobs(51);

    SUBCASE("reconstruction scheme separates the blobs") {
        const Prediction on_train = classify_r(setup.model, setup.train.features);
        CHECK(accuracy(on_train.hard, setup.train.labels) >= 0.95);
        const Prediction on_test = classify_r(setup.model, setup.test.features);
        CHECK(accuracy(on_test.hard, setup.test.labels) >= 0.95);
    }
    SUBCASE("embedding scheme separates the blobs") {
        const CodeExtractor ext = learn_code_extractor(setup.model, setup.train.features);
        const Prediction pred = classify_e(setup.model, ext, setup.test.features, false);
        CHECK(accuracy(pred.hard, setup.test.labels) >= 0.95);
    }
    SUBCASE("graph-embedded and raw codes differ unless the graph is trivial") {
        const CodeExtractor ext = learn_code_extractor(setup.model, setup.train.features);
        const Prediction off = classify_e(setup.model, ext, setup.test.features, false);
        const Prediction on = classify_e(setup.model, ext, setup.test.features, true);
        CHECK((off.soft - on.soft).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("schemes agree on at least ninety percent of clean samples") {
        const CodeExtractor ext = learn_code_extractor(setup.model, setup.train.features);
        const Prediction r = classify_r(setup.model, setup.test.features);
        const Prediction e = classify_e(setup.model, ext, setup.test.features, false);
        std::size_t agree = 0;
        for (std::size_t i = 0; i < r.hard.size(); ++i)
            if (r.hard[i] == e.hard[i]) ++agree;
        CHECK(static_cast<double>(agree) / static_cast<double>(r.hard.size()) >= 0.9);
    }
    SUBCASE("repeated classification is deterministic") {
        const Prediction a = classify_r(setup.model, setup.test.features);
        const Prediction b = classify_r(setup.model, setup.test.features);
        CHECK(a.hard == b.hard);
        CHECK((a.soft - b.soft).norm() == 0.0);
    }
    SUBCASE("classifier scores raw extracted codes when the flag is off") {
        RfddlModel model = toy_model(5, 6, 3, 53);
        model.classifier = Matrix::Zero(3, 6);
        model.classifier.leftCols(3) = Matrix::Identity(3, 3);
        CodeExtractor ext{oracles::random_matrix(6, 5, 55)};
        const Matrix x = oracles::random_matrix(5, 4, 57);
        const Prediction pred = classify_e(model, ext, x, false);
        CHECK((pred.soft - (ext.projection * x).topRows(3)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("ridge baseline") {
    SUBCASE("orthonormal one-sample-per-class training recovers its labels") {
        LabeledDataset ds;
        ds.features = Matrix::Identity(4, 3);
        ds.labels = {0, 1, 2};
        ds.num_classes = 3;
        const Matrix scorer = baseline_ridge(ds, 1e-6);
        const Prediction pred = predict_linear(scorer, ds.features);
        CHECK(pred.hard == ds.labels);
    }
    SUBCASE("heavy regularization shrinks the scorer to zero") {
        SyntheticSpec spec;
        spec.seed = 59;
        const LabeledDataset ds = synth_blobs(spec);
        const Matrix scorer = baseline_ridge(ds, 1e15);
        CHECK(scorer.cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("separable blobs classify above ninety percent") {
        SyntheticSpec spec;
        spec.num_classes = 3;
        spec.dim = 12;
        spec.samples_per_class = 60;
        spec.centroid_separation = 10.0;
        spec.seed = 61;
        const LabeledDataset ds = synth_blobs(spec);
        const auto [train_set, test_set] = split_per_class(ds, 30, 63);
        const Matrix scorer = baseline_ridge(train_set, 1.0);
        const Prediction pred = predict_linear(scorer, test_set.features);
        CHECK(accuracy(pred.hard, test_set.labels) >= 0.9);
    }
}

TEST_CASE("single-class degenerate prediction") {
    // With one class the soft matrix has a single row, so every argmax is 0.
    RfddlModel model = toy_model(4, 3, 1, 65);
    const Matrix x = oracles::random_matrix(4, 6, 67);
    const Prediction pred = classify_r(model, x);
    for (int label : pred.hard) CHECK(label == 0);
}
