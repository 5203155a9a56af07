#include "rfddl/solver.hpp"

#include "rfddl/atom_graph.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace rfddl {

void Hyperparams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0))
        throw InputError("alpha, beta and gamma must be positive");
    if (atoms_per_class < 1) throw InputError("atoms_per_class must be positive");
    if (k_neighbors < 1) throw InputError("k_neighbors must be positive");
    if (max_iter < 1) throw InputError("max_iter must be positive");
    if (!(tol > 0.0)) throw InputError("tol must be positive");
    if (!(jitter > 0.0)) throw InputError("jitter must be positive");
    if (!(irls_floor > 0.0)) throw InputError("irls_floor must be positive");
}

namespace {

/// Solve (sym + jitter * mean(diag) * I) * out = rhs. sym must be
/// symmetric positive semidefinite.
Matrix loaded_solve(Matrix sym, const Matrix& rhs, double jitter, const char* what) {
    if (jitter > 0.0) {
        double scale = sym.trace() / static_cast<double>(sym.rows());
        if (!(scale > 0.0)) scale = 1.0;
        sym.diagonal().array() += jitter * scale;
    }
    Eigen::LDLT<Matrix> ldlt(sym);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError(std::string(what) + ": factorization failed");
    Matrix out = ldlt.solve(rhs);
    if (!out.allFinite()) throw NumericalError(std::string(what) + ": non-finite solution");
    return out;
}

}  // namespace

TrainState init_state(const LabeledDataset& train, const Hyperparams& hp) {
    train.validate();
    hp.validate();

    const Eigen::Index n = train.dim();
    const Eigen::Index num_samples = train.size();
    const int c = train.num_classes;
    const int nu = hp.atoms_per_class;
    const Eigen::Index k_atoms = static_cast<Eigen::Index>(nu) * c;
    if (k_atoms > num_samples)
        throw InputError("dictionary size " + std::to_string(k_atoms) + " exceeds sample count " +
                         std::to_string(num_samples));

    TrainState st;
    st.params = hp;
    st.atom_labels.reserve(static_cast<std::size_t>(k_atoms));

    st.dictionary.resize(n, k_atoms);
    if (hp.dict_init == DictInit::kSamples) {
        std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(c));
        for (Eigen::Index i = 0; i < num_samples; ++i)
            by_class[static_cast<std::size_t>(train.labels[static_cast<std::size_t>(i)])].push_back(i);
        Eigen::Index col = 0;
        for (int cls = 0; cls < c; ++cls) {
            auto& idx = by_class[static_cast<std::size_t>(cls)];
            if (static_cast<int>(idx.size()) < nu)
                throw InputError("class " + std::to_string(cls) + " has fewer than " +
                                 std::to_string(nu) + " samples");
            Rng rng(derive_seed(hp.seed, 0xD1C7u, static_cast<std::uint64_t>(cls)));
            for (std::size_t i = idx.size() - 1; i > 0; --i)
                std::swap(idx[i], idx[static_cast<std::size_t>(rng.below(i + 1))]);
            for (int i = 0; i < nu; ++i, ++col) {
                st.dictionary.col(col) = train.features.col(idx[static_cast<std::size_t>(i)]);
                st.atom_labels.push_back(cls);
            }
        }
    } else {
        Rng rng(derive_seed(hp.seed, 0xD1C7u, 0xFFFFu));
        for (Eigen::Index j = 0; j < k_atoms; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) st.dictionary(i, j) = rng.normal();
            st.atom_labels.push_back(static_cast<int>(j) % c);
        }
    }

    Rng code_rng(derive_seed(hp.seed, 0xC0DE5u, 0));
    st.codes.resize(k_atoms, num_samples);
    for (Eigen::Index j = 0; j < num_samples; ++j)
        for (Eigen::Index i = 0; i < k_atoms; ++i) st.codes(i, j) = 0.01 * code_rng.normal();

    st.data_error = Matrix::Zero(n, num_samples);
    st.atom_error = Matrix::Zero(n, k_atoms);
    st.classifier = Matrix::Zero(c, k_atoms);
    st.irls_data = Vector::Ones(num_samples);
    st.irls_atom = Vector::Ones(k_atoms);
    st.irls_classifier = Vector::Ones(k_atoms);
    st.laplacian = build_atom_graph(st.dictionary, st.atom_labels, hp.k_neighbors).laplacian;
    return st;
}

double objective(const TrainState& st, const Matrix& x, const Matrix& q, const Matrix& h) {
    const Matrix embedded = st.laplacian * st.codes;
    const double recon = centered(st.clean_data(x) - st.clean_dictionary() * embedded).squaredNorm();
    const double sparse_err = l21_columns(st.data_error) + l21_columns(st.atom_error);
    const double code_fit = centered(q - embedded).squaredNorm();
    const double code_reg = centered(st.codes).squaredNorm();
    const double label_fit = centered(h - st.classifier * embedded).squaredNorm();
    const double classifier_reg = l21_columns(st.classifier);
    return recon + st.params.alpha * sparse_err + st.params.beta * (code_fit + code_reg) +
           st.params.gamma * (label_fit + classifier_reg);
}

Matrix update_dictionary(const TrainState& st, const Matrix& x) {
    const Matrix embedded = st.laplacian * st.codes;
    const Matrix target = centered(st.clean_data(x) + st.atom_error * embedded);
    const Matrix basis = centered(embedded);
    // D * basis ~= target in least squares; solve the Gram system.
    const Matrix gram = basis * basis.transpose();
    return loaded_solve(gram, basis * target.transpose(), st.params.jitter, "dictionary update")
        .transpose();
}

Matrix update_codes(const TrainState& st, const Matrix& x, const Matrix& q, const Matrix& h) {
    const Matrix& lap = st.laplacian;
    const Matrix clean_dict = st.clean_dictionary();
    const double beta = st.params.beta;
    const double gamma = st.params.gamma;

    Matrix sys = lap.transpose() * (clean_dict.transpose() * clean_dict) * lap;
    sys += beta * (lap.transpose() * lap);
    sys += beta * Matrix::Identity(lap.rows(), lap.cols());
    sys += gamma * lap.transpose() * (st.classifier.transpose() * st.classifier) * lap;

    Matrix rhs = lap.transpose() * (clean_dict.transpose() * st.clean_data(x));
    rhs += beta * (lap.transpose() * q);
    rhs += gamma * (lap.transpose() * (st.classifier.transpose() * h));

    return loaded_solve(std::move(sys), rhs, st.params.jitter, "code update");
}

Matrix update_atom_error(const TrainState& st, const Matrix& x) {
    const Matrix embedded = st.laplacian * st.codes;
    const Matrix basis = centered(embedded);
    const Matrix residual = centered(st.dictionary * embedded - st.clean_data(x));
    Matrix sys = basis * basis.transpose();
    sys += (st.params.alpha * st.irls_atom).asDiagonal();
    return loaded_solve(std::move(sys), basis * residual.transpose(), 0.0, "atom error update")
        .transpose();
}

Matrix update_data_error(const TrainState& st, const Matrix& x) {
    const Eigen::Index num_samples = x.cols();
    const Matrix residual = centered(x - st.clean_dictionary() * (st.laplacian * st.codes));

    // (H_e + alpha V) = (I + alpha V) - ee^T/N: a diagonal plus a rank-one
    // correction, inverted by Sherman-Morrison instead of an N x N solve.
    const Vector diag_inv =
        (1.0 + st.params.alpha * st.irls_data.array()).inverse().matrix();
    const double denom = static_cast<double>(num_samples) - diag_inv.sum();
    if (!(denom > 1e-300)) throw NumericalError("data error update: singular centering system");

    Matrix result = residual * diag_inv.asDiagonal();
    result.noalias() += (residual * diag_inv) * (diag_inv.transpose() / denom);
    if (!result.allFinite()) throw NumericalError("data error update: non-finite solution");
    return result;
}

Matrix update_classifier(const TrainState& st, const Matrix& h) {
    const Matrix basis = centered(st.laplacian * st.codes);
    Matrix sys = basis * basis.transpose();
    sys += st.irls_classifier.asDiagonal();
    return loaded_solve(std::move(sys), basis * centered(h).transpose(), 0.0, "classifier update")
        .transpose();
}

IrlsDiagonals update_irls_diagonals(const TrainState& st) {
    const double floor = st.params.irls_floor;
    auto column_weights = [floor](const Matrix& m) {
        Vector w(m.cols());
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            w(j) = 1.0 / (2.0 * std::max(m.col(j).norm(), floor));
        return w;
    };
    return {column_weights(st.data_error), column_weights(st.atom_error),
            column_weights(st.classifier)};
}

Biases compute_biases(const TrainState& st, const Matrix& x, const Matrix& q, const Matrix& h) {
    const Matrix embedded = st.laplacian * st.codes;
    Biases b;
    b.reconstruction = (st.clean_dictionary() * embedded - st.clean_data(x)).rowwise().mean();
    b.code = (embedded - q).rowwise().mean();
    b.label = (st.classifier * embedded - h).rowwise().mean();
    return b;
}

void sweep_blocks(TrainState& st, const Matrix& x, const Matrix& q, const Matrix& h) {
    st.dictionary = update_dictionary(st, x);
    st.codes = update_codes(st, x, q, h);
    st.atom_error = update_atom_error(st, x);
    st.data_error = update_data_error(st, x);
    st.classifier = update_classifier(st, h);
    IrlsDiagonals diag = update_irls_diagonals(st);
    st.irls_data = std::move(diag.data);
    st.irls_atom = std::move(diag.atom);
    st.irls_classifier = std::move(diag.classifier);
}

TrainResult train(const LabeledDataset& train_set, const Hyperparams& hp) {
    TrainState st = init_state(train_set, hp);
    const Matrix& x = train_set.features;
    const Matrix h = build_label_matrix(train_set.labels, train_set.num_classes);
    const Matrix q = build_indicator_codes(train_set.labels, st.atom_labels);

    bool converged = false;
    for (int it = 1; it <= hp.max_iter; ++it) {
        st.laplacian =
            build_atom_graph(st.clean_dictionary(), st.atom_labels, hp.k_neighbors).laplacian;
        sweep_blocks(st, x, q, h);
        const double obj = objective(st, x, q, h);
        if (!std::isfinite(obj)) {
            const double last =
                st.objective_history.empty() ? 0.0 : st.objective_history.back();
            throw NumericalError("objective diverged at iteration " + std::to_string(it) +
                                 "; last finite value " + std::to_string(last));
        }
        st.objective_history.push_back(obj);
        st.iter = it;
        const std::size_t len = st.objective_history.size();
        if (len >= 2 &&
            std::abs(st.objective_history[len - 2] - st.objective_history[len - 1]) < hp.tol) {
            converged = true;
            break;
        }
    }

    TrainResult result;
    result.model.dictionary = st.clean_dictionary();
    result.model.codes = st.codes;
    result.model.laplacian = st.laplacian;
    result.model.classifier = st.classifier;
    result.model.atom_labels = st.atom_labels;
    result.model.params = hp;
    result.converged = converged;
    result.state = std::move(st);
    return result;
}

}  // namespace rfddl
