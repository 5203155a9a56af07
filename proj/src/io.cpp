#include "rfddl/io.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rfddl::io {

namespace {

constexpr std::uint32_t kMatrixVersion = 1;
constexpr std::uint32_t kModelVersion = 1;
constexpr char kMatrixMagic[4] = {'R', 'F', 'D', 'M'};
constexpr char kModelMagic[4] = {'R', 'F', 'M', 'L'};

inline std::uint32_t bswap32(std::uint32_t v) {
    return ((v & 0xFF000000u) >> 24) | ((v & 0x00FF0000u) >> 8) | ((v & 0x0000FF00u) << 8) |
           ((v & 0x000000FFu) << 24);
}

inline std::uint64_t bswap64(std::uint64_t v) {
    return (static_cast<std::uint64_t>(bswap32(static_cast<std::uint32_t>(v))) << 32) |
           bswap32(static_cast<std::uint32_t>(v >> 32));
}

constexpr bool kBigHost = std::endian::native == std::endian::big;

inline std::uint32_t to_le32(std::uint32_t v) { return kBigHost ? bswap32(v) : v; }
inline std::uint64_t to_le64(std::uint64_t v) { return kBigHost ? bswap64(v) : v; }

struct ByteWriter {
    std::string buf;

    void raw(const void* data, std::size_t n) {
        buf.append(static_cast<const char*>(data), n);
    }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) {
        v = to_le32(v);
        raw(&v, 4);
    }
    void u64(std::uint64_t v) {
        v = to_le64(v);
        raw(&v, 8);
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void matrix(const Matrix& m) {
        u64(static_cast<std::uint64_t>(m.rows()));
        u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
};

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) {
        if (pos + n > buf.size())
            throw FormatError(std::string("truncated payload reading ") + what + " at offset " +
                              std::to_string(pos));
    }
    void raw(void* out, std::size_t n, const char* what) {
        need(n, what);
        std::memcpy(out, buf.data() + pos, n);
        pos += n;
    }
    std::uint8_t u8(const char* what) {
        std::uint8_t v;
        raw(&v, 1, what);
        return v;
    }
    std::uint32_t u32(const char* what) {
        std::uint32_t v;
        raw(&v, 4, what);
        return to_le32(v);
    }
    std::uint64_t u64(const char* what) {
        std::uint64_t v;
        raw(&v, 8, what);
        return to_le64(v);
    }
    std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    Matrix matrix(const char* what) {
        const std::uint64_t rows = u64(what);
        const std::uint64_t cols = u64(what);
        if (rows > (1u << 24) || cols > (1u << 24))
            throw FormatError(std::string("implausible matrix shape in ") + what);
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64(what);
        return m;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_bytes_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open file for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw InputError("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw InputError("cannot rename " + tmp + " to " + path);
}

Matrix parse_csv_matrix(const std::string& text, const std::string& path) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            while (p < end && *p == ' ') ++p;
            double value = 0.0;
            auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc())
                throw FormatError("non-numeric token at " + path + ":" + std::to_string(line_no));
            row.push_back(value);
            p = next;
            while (p < end && *p == ' ') ++p;
            if (p == end) break;
            if (*p != ',')
                throw FormatError("expected ',' at " + path + ":" + std::to_string(line_no));
            ++p;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError("ragged row at " + path + ":" + std::to_string(line_no) + " (" +
                              std::to_string(row.size()) + " values, expected " +
                              std::to_string(rows.front().size()) + ")");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("empty matrix file: " + path);
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Matrix parse_binary_matrix(const std::string& bytes, const std::string& path) {
    ByteReader r{bytes};
    char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, kMatrixMagic, 4) != 0)
        throw FormatError("bad magic in " + path + " at offset 0");
    const std::uint32_t version = r.u32("version");
    if (version != kMatrixVersion)
        throw FormatError("unsupported matrix format version " + std::to_string(version) +
                          " in " + path);
    Matrix m = r.matrix("matrix payload");
    if (r.pos != bytes.size())
        throw FormatError("trailing bytes in " + path + " at offset " + std::to_string(r.pos));
    return m;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_safe(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

}  // namespace

Matrix load_matrix(const std::string& path, MatrixFormat format, Orientation orientation) {
    const std::string bytes = read_file(path);
    Matrix m = format == MatrixFormat::kCsv ? parse_csv_matrix(bytes, path)
                                            : parse_binary_matrix(bytes, path);
    if (orientation == Orientation::kSamplesAsRows) m.transposeInPlace();
    return m;
}

void save_matrix_csv(const std::string& path, const Matrix& m) {
    std::string text;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) text += ',';
            text += format_double(m(i, j));
        }
        text += '\n';
    }
    write_bytes_atomic(path, text);
}

void save_matrix_binary(const std::string& path, const Matrix& m) {
    ByteWriter w;
    w.raw(kMatrixMagic, 4);
    w.u32(kMatrixVersion);
    w.matrix(m);
    write_bytes_atomic(path, w.buf);
}

std::vector<int> load_labels(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<int> labels;
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        int value = 0;
        auto [next, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
        if (ec != std::errc() || next != line.data() + line.size())
            throw FormatError("non-integer label at " + path + ":" + std::to_string(line_no));
        if (value < 0)
            throw InputError("negative label at " + path + ":" + std::to_string(line_no));
        labels.push_back(value);
    }
    if (labels.empty()) throw InputError("empty label file: " + path);
    return labels;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
    std::string text;
    for (int l : labels) {
        text += std::to_string(l);
        text += '\n';
    }
    write_bytes_atomic(path, text);
}

void save_model(const std::string& path, const RfddlModel& model) {
    ByteWriter w;
    w.raw(kModelMagic, 4);
    w.u32(kModelVersion);
    const Hyperparams& hp = model.params;
    w.f64(hp.alpha);
    w.f64(hp.beta);
    w.f64(hp.gamma);
    w.u32(static_cast<std::uint32_t>(hp.atoms_per_class));
    w.u32(static_cast<std::uint32_t>(hp.k_neighbors));
    w.u32(static_cast<std::uint32_t>(hp.max_iter));
    w.f64(hp.tol);
    w.f64(hp.jitter);
    w.f64(hp.irls_floor);
    w.u64(hp.seed);
    w.u8(hp.dict_init == DictInit::kRandom ? 1 : 0);
    w.u64(model.atom_labels.size());
    for (int l : model.atom_labels) w.i32(l);
    w.matrix(model.dictionary);
    w.matrix(model.codes);
    w.matrix(model.laplacian);
    w.matrix(model.classifier);
    write_bytes_atomic(path, w.buf);
}

RfddlModel load_model(const std::string& path) {
    const std::string bytes = read_file(path);
    ByteReader r{bytes};
    char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, kModelMagic, 4) != 0)
        throw FormatError("bad magic in " + path + " at offset 0");
    const std::uint32_t version = r.u32("version");
    if (version != kModelVersion)
        throw FormatError("unsupported model format version " + std::to_string(version) + " in " +
                          path);

    RfddlModel model;
    Hyperparams& hp = model.params;
    hp.alpha = r.f64("alpha");
    hp.beta = r.f64("beta");
    hp.gamma = r.f64("gamma");
    hp.atoms_per_class = static_cast<int>(r.u32("atoms_per_class"));
    hp.k_neighbors = static_cast<int>(r.u32("k_neighbors"));
    hp.max_iter = static_cast<int>(r.u32("max_iter"));
    hp.tol = r.f64("tol");
    hp.jitter = r.f64("jitter");
    hp.irls_floor = r.f64("irls_floor");
    hp.seed = r.u64("seed");
    hp.dict_init = r.u8("dict_init") == 1 ? DictInit::kRandom : DictInit::kSamples;
    const std::uint64_t n_atoms = r.u64("atom label count");
    if (n_atoms > (1u << 24)) throw FormatError("implausible atom count in " + path);
    model.atom_labels.resize(n_atoms);
    for (std::uint64_t i = 0; i < n_atoms; ++i) model.atom_labels[i] = r.i32("atom label");
    model.dictionary = r.matrix("dictionary");
    model.codes = r.matrix("codes");
    model.laplacian = r.matrix("laplacian");
    model.classifier = r.matrix("classifier");
    if (r.pos != bytes.size())
        throw FormatError("trailing bytes in " + path + " at offset " + std::to_string(r.pos));
    return model;
}

void write_text_atomic(const std::string& path, const std::string& contents) {
    write_bytes_atomic(path, contents);
}

std::string report_to_csv(const ExperimentReport& report) {
    std::string text = to_string(report.config.axis);
    for (Method m : report.config.methods) text += "," + to_string(m) + "_accuracy";
    text += ",snr_noisy_db,rmse_noisy,wall_seconds,seed,skipped,reason\n";
    for (const SweepCell& cell : report.cells) {
        text += format_double(cell.axis_value);
        for (Method m : report.config.methods) {
            text += ',';
            const auto it = cell.mean_accuracy.find(m);
            text += it == cell.mean_accuracy.end() ? "nan" : format_double(it->second);
        }
        text += ',' + format_double(cell.mean_snr_noisy_db);
        text += ',' + format_double(cell.mean_rmse_noisy);
        text += ',' + format_double(cell.wall_seconds);
        text += ',' + std::to_string(cell.seed);
        text += cell.skipped ? ",1," : ",0,";
        text += csv_safe(cell.skip_reason);
        text += '\n';
    }
    return text;
}

namespace {

nlohmann::json confusion_to_json(const MatrixI& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["axis"] = to_string(report.config.axis);
    j["values"] = report.config.values;
    nlohmann::json methods = nlohmann::json::array();
    for (Method m : report.config.methods) methods.push_back(to_string(m));
    j["methods"] = std::move(methods);
    j["repeats"] = report.config.repeats;
    j["train_per_class"] = report.config.train_per_class;
    j["base_variance"] = report.config.variance;
    j["ridge_eps"] = report.config.ridge_eps;
    j["seed"] = report.config.seed;

    nlohmann::json cells = nlohmann::json::array();
    for (const SweepCell& cell : report.cells) {
        nlohmann::json c;
        c["axis_value"] = cell.axis_value;
        c["skipped"] = cell.skipped;
        if (cell.skipped) c["reason"] = cell.skip_reason;
        for (const auto& [method, acc] : cell.mean_accuracy)
            c["mean_accuracy"][to_string(method)] = acc;
        for (const auto& [method, accs] : cell.per_repeat_accuracy)
            c["per_repeat_accuracy"][to_string(method)] = accs;
        for (const auto& [method, confusion] : cell.confusion)
            c["confusion"][to_string(method)] = confusion_to_json(confusion);
        c["snr_noisy_db"] = cell.mean_snr_noisy_db;
        c["rmse_noisy"] = cell.mean_rmse_noisy;
        c["wall_seconds"] = cell.wall_seconds;
        c["seed"] = cell.seed;
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    return j.dump(2) + "\n";
}

std::string denoise_to_json(const DenoiseReport& report) {
    nlohmann::json j;
    j["variance"] = report.variance;
    j["seed"] = report.seed;
    j["snr_noisy_db"] = report.snr_noisy_db;
    j["snr_recovered_db"] = report.snr_recovered_db;
    j["rmse_noisy"] = report.rmse_noisy;
    j["rmse_recovered"] = report.rmse_recovered;
    j["column_error_energy"] = report.column_error_energy;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["wall_seconds"] = report.wall_seconds;
    return j.dump(2) + "\n";
}

}  // namespace rfddl::io
