#include "rfddl/inference.hpp"

#include "rfddl/kernels.hpp"

#include <Eigen/Cholesky>

namespace rfddl {

Matrix codes_by_reconstruction(const RfddlModel& model, const Matrix& x_test) {
    if (x_test.rows() != model.dictionary.rows())
        throw InputError("test feature dimension " + std::to_string(x_test.rows()) +
                         " does not match dictionary dimension " +
                         std::to_string(model.dictionary.rows()));
    Matrix sys = model.dictionary.transpose() * model.dictionary;
    sys += Matrix::Identity(sys.rows(), sys.cols());
    Eigen::LLT<Matrix> llt(sys);
    if (llt.info() != Eigen::Success)
        throw NumericalError("test coding system is not positive definite");
    return kernels::solve_columns(llt, model.dictionary.transpose() * x_test);
}

CodeExtractor learn_code_extractor(const RfddlModel& model, const Matrix& x_train) {
    if (x_train.rows() != model.dictionary.rows())
        throw InputError("training matrix dimension does not match the model");
    if (x_train.cols() != model.codes.cols())
        throw InputError("training matrix sample count does not match the stored codes");

    const Matrix& lap = model.laplacian;
    Matrix left = lap.transpose() * lap;
    left += Matrix::Identity(left.rows(), left.cols());
    const Matrix target = Eigen::LDLT<Matrix>(left).solve(lap.transpose() * model.codes);

    Matrix gram = x_train * x_train.transpose();
    const double ridge =
        model.params.jitter * gram.trace() / static_cast<double>(x_train.rows());
    gram.diagonal().array() += ridge;
    // G = target X^T (X X^T + eps I)^{-1}; transpose-solve keeps it one LDLT.
    Matrix projection =
        Eigen::LDLT<Matrix>(gram).solve(x_train * target.transpose()).transpose();
    if (!projection.allFinite()) throw NumericalError("code extractor is non-finite");
    return {std::move(projection)};
}

Prediction predict_from_codes(const RfddlModel& model, const Matrix& codes) {
    if (codes.rows() != model.classifier.cols())
        throw InputError("code row count does not match the classifier");
    Prediction pred;
    pred.soft = model.classifier * codes;
    pred.hard = kernels::argmax_columns(pred.soft);
    return pred;
}

Prediction classify_r(const RfddlModel& model, const Matrix& x_test) {
    return predict_from_codes(model, codes_by_reconstruction(model, x_test));
}

Prediction classify_e(const RfddlModel& model, const CodeExtractor& extractor,
                      const Matrix& x_test, bool apply_laplacian) {
    if (x_test.rows() != extractor.projection.cols())
        throw InputError("test feature dimension does not match the extractor");
    Matrix codes = extractor.projection * x_test;
    if (apply_laplacian) codes = model.laplacian * codes;
    return predict_from_codes(model, codes);
}

Matrix baseline_ridge(const LabeledDataset& train, double eps) {
    train.validate();
    if (!(eps > 0.0)) throw InputError("ridge eps must be positive");
    const Matrix h = build_label_matrix(train.labels, train.num_classes);
    Matrix gram = train.features * train.features.transpose();
    gram.diagonal().array() += eps;
    return Eigen::LDLT<Matrix>(gram)
        .solve(train.features * h.transpose())
        .transpose();
}

Prediction predict_linear(const Matrix& scorer, const Matrix& x) {
    if (scorer.cols() != x.rows()) throw InputError("scorer dimension does not match samples");
    Prediction pred;
    pred.soft = scorer * x;
    pred.hard = kernels::argmax_columns(pred.soft);
    return pred;
}

}  // namespace rfddl
