#include "lpvembed/model_io.hpp"

#include "lpvembed/error.hpp"

#include <fstream>
#include <sstream>

namespace lpvembed {

using nlohmann::json;

namespace {

using Index = Eigen::Index;

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw Error(ErrorCode::FormatError, std::string("missing key '") + key + "'");
    return *it;
}

std::size_t read_size(const json& obj, const char* key) {
    const json& v = require(obj, key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw Error(ErrorCode::FormatError, std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

double read_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw Error(ErrorCode::FormatError, what + " must contain numbers only");
    return v.get<double>();
}

Matrix read_matrix(const json& v, const char* name, std::size_t rows, std::size_t cols) {
    if (!v.is_array()) throw Error(ErrorCode::FormatError, std::string(name) + " must be an array of rows");
    if (v.size() != rows)
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has " + std::to_string(v.size()) +
                                                      " rows, expected " + std::to_string(rows));
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = v[r];
        if (!row.is_array()) throw Error(ErrorCode::FormatError, std::string(name) + " rows must be arrays");
        if (row.size() != cols)
            throw Error(ErrorCode::DimensionMismatch, std::string(name) + " row " + std::to_string(r + 1) + " has " +
                                                          std::to_string(row.size()) + " columns, expected " +
                                                          std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Index>(r), static_cast<Index>(c)) = read_number(row[c], name);
    }
    return m;
}

Matrix read_optional_matrix(const json& doc, const char* name, std::size_t rows, std::size_t cols) {
    auto it = doc.find(name);
    if (it == doc.end()) return Matrix::Zero(static_cast<Index>(rows), static_cast<Index>(cols));
    return read_matrix(*it, name, rows, cols);
}

Vector read_vector(const json& v, const char* name, std::size_t n) {
    if (!v.is_array()) throw Error(ErrorCode::FormatError, std::string(name) + " must be an array");
    if (v.size() != n)
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has length " + std::to_string(v.size()) +
                                                      ", expected " + std::to_string(n));
    Vector out(static_cast<Index>(n));
    for (std::size_t k = 0; k < n; ++k) out[static_cast<Index>(k)] = read_number(v[k], name);
    return out;
}

json write_matrix(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json write_vector(const Vector& v) {
    json out = json::array();
    for (Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
    return out;
}

Expression read_expression(const json& v, std::size_t n_z, const std::string& what) {
    if (!v.is_string()) throw Error(ErrorCode::FormatError, what + " must be an expression string");
    return parse(v.get<std::string>(), n_z);
}

Dims read_dims(const json& doc) {
    const json& d = require(doc, "dims");
    if (!d.is_object()) throw Error(ErrorCode::FormatError, "'dims' must be an object");
    Dims out;
    out.n_x = read_size(d, "n_x");
    out.n_u = read_size(d, "n_u");
    out.n_y = read_size(d, "n_y");
    out.n_w = read_size(d, "n_w");
    out.n_z = read_size(d, "n_z");
    if (d.contains("n_p")) out.n_p = read_size(d, "n_p");
    if (out.n_x == 0 || out.n_u == 0 || out.n_y == 0 || out.n_w == 0 || out.n_z == 0)
        throw Error(ErrorCode::DimensionMismatch, "every model dimension must be at least 1");
    return out;
}

json write_dims(const Dims& d, bool with_np) {
    json out = {{"n_x", d.n_x}, {"n_u", d.n_u}, {"n_y", d.n_y}, {"n_w", d.n_w}, {"n_z", d.n_z}};
    if (with_np) out["n_p"] = d.n_p;
    return out;
}

struct Interconnect {
    Matrix A, Bw, Bu, Cz, Cy, Dzu, Dyw, Dyu;
    ExpressionVector f;
};

Interconnect read_interconnect(const json& doc, const Dims& d) {
    Interconnect m;
    m.A = read_matrix(require(doc, "A"), "A", d.n_x, d.n_x);
    m.Bw = read_matrix(require(doc, "Bw"), "Bw", d.n_x, d.n_w);
    m.Bu = read_matrix(require(doc, "Bu"), "Bu", d.n_x, d.n_u);
    m.Cz = read_matrix(require(doc, "Cz"), "Cz", d.n_z, d.n_x);
    m.Cy = read_matrix(require(doc, "Cy"), "Cy", d.n_y, d.n_x);
    m.Dzu = read_optional_matrix(doc, "Dzu", d.n_z, d.n_u);
    m.Dyw = read_optional_matrix(doc, "Dyw", d.n_y, d.n_w);
    m.Dyu = read_optional_matrix(doc, "Dyu", d.n_y, d.n_u);
    if (doc.contains("Dzw")) {
        const Matrix dzw = read_matrix(doc.at("Dzw"), "Dzw", d.n_z, d.n_w);
        if (!(dzw.array() == 0.0).all())
            throw Error(ErrorCode::NonzeroDzw, "Dzw must be zero: the nonlinearity would be implicit");
    }
    const json& f = require(doc, "f");
    if (!f.is_array()) throw Error(ErrorCode::FormatError, "'f' must be an array of expression strings");
    if (f.size() != d.n_w)
        throw Error(ErrorCode::ExpressionArityMismatch,
                    "f has " + std::to_string(f.size()) + " rows, expected n_w = " + std::to_string(d.n_w));
    for (std::size_t r = 0; r < f.size(); ++r)
        m.f.push_back(read_expression(f[r], d.n_z, "f row " + std::to_string(r + 1)));
    return m;
}

void write_interconnect(json& doc, const Matrix& A, const Matrix& Bw, const Matrix& Bu, const Matrix& Cz,
                        const Matrix& Cy, const Matrix& Dzu, const Matrix& Dyw, const Matrix& Dyu,
                        const ExpressionVector& f) {
    doc["A"] = write_matrix(A);
    doc["Bw"] = write_matrix(Bw);
    doc["Bu"] = write_matrix(Bu);
    doc["Cz"] = write_matrix(Cz);
    doc["Cy"] = write_matrix(Cy);
    doc["Dzu"] = write_matrix(Dzu);
    doc["Dyw"] = write_matrix(Dyw);
    doc["Dyu"] = write_matrix(Dyu);
    json rows = json::array();
    for (const auto& e : f) rows.push_back(e.to_string());
    doc["f"] = std::move(rows);
}

std::size_t read_index(const json& obj, const char* key, std::size_t limit, const char* what) {
    const std::size_t v = read_size(obj, key);
    if (v == 0 || v > limit)
        throw Error(ErrorCode::FormatError, std::string(what) + " index '" + key + "' out of range");
    return v - 1;
}

}  // namespace

ModelKind detect_kind(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::FormatError, "model file must hold a JSON object");
    if (auto it = doc.find("format"); it != doc.end()) {
        if (*it == "nlfr") return ModelKind::Nlfr;
        if (*it == "lpv") return ModelKind::Lpv;
        throw Error(ErrorCode::FormatError, "unknown model format " + it->dump());
    }
    return doc.contains("basis") ? ModelKind::Lpv : ModelKind::Nlfr;
}

static NlfrModel nlfr_from_json_impl(const json& doc) {
    if (detect_kind(doc) != ModelKind::Nlfr) throw Error(ErrorCode::FormatError, "expected an NLFR model file");
    const Dims d = read_dims(doc);
    Interconnect m = read_interconnect(doc, d);
    NlfrModel model{std::move(m.A), std::move(m.Bw), std::move(m.Bu), std::move(m.Cz), std::move(m.Cy),
                    std::move(m.Dzu), std::move(m.Dyw), std::move(m.Dyu), std::move(m.f)};
    return validate_nlfr(std::move(model), d);
}

json to_json(const NlfrModel& model) {
    json doc;
    doc["format"] = "nlfr";
    doc["dims"] = write_dims(dims(model), false);
    write_interconnect(doc, model.A, model.Bw, model.Bu, model.Cz, model.Cy, model.Dzu, model.Dyw, model.Dyu,
                       model.f);
    return doc;
}

static LpvModel lpv_from_json_impl(const json& doc) {
    if (detect_kind(doc) != ModelKind::Lpv) throw Error(ErrorCode::FormatError, "expected an LPV model file");
    const Dims d = read_dims(doc);
    Interconnect m = read_interconnect(doc, d);

    LpvModel lpv;
    lpv.A = std::move(m.A);
    lpv.Bw = std::move(m.Bw);
    lpv.Bu = std::move(m.Bu);
    lpv.Cz = std::move(m.Cz);
    lpv.Cy = std::move(m.Cy);
    lpv.Dzu = std::move(m.Dzu);
    lpv.Dyw = std::move(m.Dyw);
    lpv.Dyu = std::move(m.Dyu);
    lpv.f = std::move(m.f);
    lpv.d = read_vector(require(doc, "d"), "d", d.n_u);
    lpv.y0 = read_vector(require(doc, "y0"), "y0", d.n_y);

    SchedulingMap& s = lpv.schedule;
    s.n_w = d.n_w;
    s.n_z = d.n_z;
    s.entries.assign(d.n_w * d.n_z, MapEntry{});
    s.c = read_vector(require(doc, "c"), "c", d.n_w);
    const json& ordering = require(doc, "ordering");
    if (!ordering.is_array()) throw Error(ErrorCode::FormatError, "'ordering' must be an array");
    for (const auto& v : ordering) {
        if (!v.is_number_integer() || v.get<long long>() < 1)
            throw Error(ErrorCode::InvalidOrdering, "ordering entries are 1-based integers");
        s.ordering.push_back(v.get<std::size_t>() - 1);
    }
    if (!is_valid_ordering(s.ordering, d.n_z)) throw Error(ErrorCode::InvalidOrdering, "invalid stored ordering");

    const json& schedule = require(doc, "schedule");
    if (!schedule.is_array()) throw Error(ErrorCode::FormatError, "'schedule' must be an array");
    for (const auto& item : schedule) {
        const std::size_t r = read_index(item, "r", d.n_w, "schedule");
        const std::size_t i = read_index(item, "i", d.n_z, "schedule");
        MapEntry& e = s.at(r, i);
        if (e.kind != EntryKind::Zero) throw Error(ErrorCode::FormatError, "duplicate schedule entry");
        const std::string kind = require(item, "kind").get<std::string>();
        const std::string where = "schedule entry (" + std::to_string(r + 1) + "," + std::to_string(i + 1) + ")";
        if (kind == "exact") {
            e.kind = EntryKind::Exact;
            e.exact = read_expression(require(item, "expr"), d.n_z, where);
            if (e.exact.empty()) throw Error(ErrorCode::FormatError, where + " is identically zero");
        } else if (kind == "guarded") {
            const std::size_t divisor = read_index(item, "divisor", d.n_z, where.c_str());
            const double tau = read_number(require(item, "tau"), where + " tau");
            e.kind = EntryKind::Guarded;
            e.guarded = make_guarded(read_expression(require(item, "numerator"), d.n_z, where), divisor, tau);
            if (!(e.guarded.derivative == read_expression(require(item, "derivative"), d.n_z, where)))
                throw Error(ErrorCode::FormatError, where + ": stored derivative does not match the numerator");
        } else {
            throw Error(ErrorCode::FormatError, where + " has unknown kind '" + kind + "'");
        }
    }

    const json& basis = require(doc, "basis");
    if (!basis.is_array()) throw Error(ErrorCode::FormatError, "'basis' must be an array");
    for (const auto& item : basis) {
        Channel ch;
        ch.row = read_index(item, "r", d.n_w, "basis");
        ch.col = read_index(item, "i", d.n_z, "basis");
        ch.A = read_matrix(require(item, "Ak"), "Ak", d.n_x, d.n_x);
        ch.B = read_matrix(require(item, "Bk"), "Bk", d.n_x, d.n_u);
        ch.C = read_matrix(require(item, "Ck"), "Ck", d.n_y, d.n_x);
        ch.D = read_matrix(require(item, "Dk"), "Dk", d.n_y, d.n_u);
        lpv.basis.push_back(std::move(ch));
    }
    if (doc.at("dims").contains("n_p") && d.n_p != lpv.basis.size())
        throw Error(ErrorCode::ChannelCountMismatch, "dims.n_p disagrees with the basis length");
    return validate_lpv(std::move(lpv));
}

NlfrModel nlfr_from_json(const json& doc) {
    try {
        return nlfr_from_json_impl(doc);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("malformed model file: ") + e.what());
    }
}

LpvModel lpv_from_json(const json& doc) {
    try {
        return lpv_from_json_impl(doc);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("malformed model file: ") + e.what());
    }
}

json to_json(const LpvModel& model) {
    json doc;
    doc["format"] = "lpv";
    doc["dims"] = write_dims(dims(model), true);
    write_interconnect(doc, model.A, model.Bw, model.Bu, model.Cz, model.Cy, model.Dzu, model.Dyw, model.Dyu,
                       model.f);
    json ordering = json::array();
    for (auto v : model.schedule.ordering) ordering.push_back(v + 1);
    doc["ordering"] = std::move(ordering);
    doc["c"] = write_vector(model.schedule.c);
    doc["d"] = write_vector(model.d);
    doc["y0"] = write_vector(model.y0);

    json basis = json::array();
    for (const auto& ch : model.basis) {
        basis.push_back({{"r", ch.row + 1},
                         {"i", ch.col + 1},
                         {"Ak", write_matrix(ch.A)},
                         {"Bk", write_matrix(ch.B)},
                         {"Ck", write_matrix(ch.C)},
                         {"Dk", write_matrix(ch.D)}});
    }
    doc["basis"] = std::move(basis);

    json schedule = json::array();
    const SchedulingMap& s = model.schedule;
    for (std::size_t r = 0; r < s.n_w; ++r) {
        for (std::size_t i = 0; i < s.n_z; ++i) {
            const MapEntry& e = s.at(r, i);
            if (e.kind == EntryKind::Zero) continue;
            json item = {{"r", r + 1}, {"i", i + 1}};
            if (e.kind == EntryKind::Exact) {
                item["kind"] = "exact";
                item["expr"] = e.exact.to_string();
            } else {
                item["kind"] = "guarded";
                item["numerator"] = e.guarded.numerator.to_string();
                item["derivative"] = e.guarded.derivative.to_string();
                item["divisor"] = e.guarded.divisor + 1;
                item["tau"] = e.guarded.tau;
            }
            schedule.push_back(std::move(item));
        }
    }
    doc["schedule"] = std::move(schedule);
    return doc;
}

namespace {

json parse_text(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

std::string serialize_nlfr(const NlfrModel& model) { return to_json(model).dump(2) + "\n"; }
NlfrModel deserialize_nlfr(std::string_view text) { return nlfr_from_json(parse_text(text)); }
std::string serialize_lpv(const LpvModel& model) { return to_json(model).dump(2) + "\n"; }
LpvModel deserialize_lpv(std::string_view text) { return lpv_from_json(parse_text(text)); }

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

NlfrModel load_nlfr(const std::string& path) { return nlfr_from_json(read_json_file(path)); }
void save_nlfr(const NlfrModel& model, const std::string& path) { write_text_file(path, serialize_nlfr(model)); }
LpvModel load_lpv(const std::string& path) { return lpv_from_json(read_json_file(path)); }
void save_lpv(const LpvModel& model, const std::string& path) { write_text_file(path, serialize_lpv(model)); }

}  // namespace lpvembed
