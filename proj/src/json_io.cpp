#include "mvcone/json_io.hpp"

#include "mvcone/errors.hpp"

#include <cmath>
#include <set>

namespace mvcone::io {

using nlohmann::json;

namespace {

const json& member(const json& doc, const char* key, const std::string& where) {
    if (!doc.is_object()) throw ConfigError(where, "expected an object");
    const auto it = doc.find(key);
    if (it == doc.end()) throw ConfigError(where + "." + key, "missing");
    return *it;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where, "must be finite");
    return x;
}

Vector vector_of(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where, "expected an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = number(v[i], where + "[" + std::to_string(i) + "]");
    }
    return out;
}

Matrix matrix_of(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where, "expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::Index cols = -1;
    Matrix out;
    for (std::size_t r = 0; r < v.size(); ++r) {
        const std::string at = where + "[" + std::to_string(r) + "]";
        const Vector row = vector_of(v[r], at);
        if (cols < 0) {
            cols = row.size();
            out.resize(rows, cols);
        } else if (row.size() != cols) {
            throw ConfigError(at, "row length differs from the first row");
        }
        out.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    if (cols < 0) out.resize(0, 0);
    return out;
}

std::vector<Vector> vectors_of(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where, "expected an array of vectors");
    std::vector<Vector> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(vector_of(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vector(m.row(r).transpose())));
    return a;
}

}  // namespace

json parse_document(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(where, std::string("invalid JSON: ") + e.what());
    }
}

LevyModel model_from_json(const json& doc, const std::string& where) {
    const json& dim_v = member(doc, "dim", where);
    if (!dim_v.is_number_integer()) throw ConfigError(where + ".dim", "expected an integer");
    const int dim = dim_v.get<int>();
    if (dim < 1) throw ConfigError(where + ".dim", "must be at least 1");

    Vector drift = vector_of(member(doc, "drift", where), where + ".drift");
    if (drift.size() != dim) throw ConfigError(where + ".drift", "length differs from dim");
    Matrix diffusion = matrix_of(member(doc, "diffusion", where), where + ".diffusion");
    if (diffusion.rows() != dim || diffusion.cols() != dim) {
        throw ConfigError(where + ".diffusion", "must be a dim x dim matrix");
    }

    std::vector<JumpAtom> atoms;
    if (const auto it = doc.find("jumps"); it != doc.end()) {
        if (!it->is_array()) throw ConfigError(where + ".jumps", "expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string at = where + ".jumps[" + std::to_string(k) + "]";
            JumpAtom a{vector_of(member((*it)[k], "u", at), at + ".u"), number(member((*it)[k], "lambda", at), at + ".lambda")};
            if (a.u.size() != dim) throw ConfigError(at + ".u", "length differs from dim");
            if (!(a.lambda > 0.0)) throw ConfigError(at + ".lambda", "must be positive");
            atoms.push_back(std::move(a));
        }
    }
    const double horizon = number(member(doc, "horizon", where), where + ".horizon");
    if (!(horizon > 0.0)) throw ConfigError(where + ".horizon", "must be positive");

    try {
        return build_levy_model(dim, std::move(drift), std::move(diffusion), std::move(atoms), horizon);
    } catch (const Error& e) {
        const std::string field = e.code() == ErrorCode::NotPSD ? where + ".diffusion" : where;
        throw ConfigError(field, e.what());
    }
}

json model_to_json(const LevyModel& model) {
    json doc;
    doc["dim"] = model.dim();
    doc["drift"] = to_json(model.drift());
    doc["diffusion"] = to_json(model.diffusion());
    doc["jumps"] = json::array();
    for (const auto& a : model.jumps()) doc["jumps"].push_back({{"u", to_json(a.u)}, {"lambda", a.lambda}});
    doc["horizon"] = model.horizon();
    return doc;
}

Cone cone_from_json(const json& doc, int dim, const std::string& where) {
    const json& type_v = member(doc, "type", where);
    if (!type_v.is_string()) throw ConfigError(where + ".type", "expected a string");
    const std::string type = type_v.get<std::string>();
    static const std::set<std::string> known{"full", "zero", "orthant", "ray", "span", "polyhedral", "product"};
    if (!known.contains(type)) throw ConfigError(where + ".type", "unknown cone type '" + type + "'");
    const auto data_it = doc.find("data");
    const bool has_data = data_it != doc.end() && !data_it->is_null();
    const std::string data_at = where + ".data";

    try {
        if (type == "full" || type == "zero" || type == "orthant") {
            if (has_data) {
                if (!data_it->is_number_integer() || data_it->get<int>() != dim) {
                    throw ConfigError(data_at, "must be omitted or equal the model dimension");
                }
            }
            if (type == "full") return Cone::full_space(dim);
            if (type == "zero") return Cone::zero(dim);
            return Cone::orthant(dim);
        }
        if (!has_data) throw ConfigError(data_at, "missing");
        if (type == "ray") {
            const Vector d = vector_of(*data_it, data_at);
            if (d.size() != dim) throw ConfigError(data_at, "length differs from the model dimension");
            return Cone::ray(d);
        }
        if (type == "span" || type == "polyhedral") {
            const auto vs = vectors_of(*data_it, data_at);
            for (std::size_t i = 0; i < vs.size(); ++i) {
                if (vs[i].size() != dim) {
                    throw ConfigError(data_at + "[" + std::to_string(i) + "]", "length differs from the model dimension");
                }
            }
            return type == "span" ? Cone::span(dim, vs) : Cone::polyhedral(dim, vs);
        }
        // product
        if (!data_it->is_array()) throw ConfigError(data_at, "expected an array of cones");
        std::vector<Cone> parts;
        int used = 0;
        for (std::size_t i = 0; i < data_it->size(); ++i) {
            const json& part = (*data_it)[i];
            const std::string at = data_at + "[" + std::to_string(i) + "]";
            const auto dim_it = part.is_object() ? part.find("dim") : part.end();
            if (!part.is_object() || dim_it == part.end() || !dim_it->is_number_integer()) {
                throw ConfigError(at + ".dim", "product parts need an integer dim");
            }
            const int pd = dim_it->get<int>();
            if (pd < 1) throw ConfigError(at + ".dim", "must be at least 1");
            parts.push_back(cone_from_json(part, pd, at));
            used += pd;
        }
        if (used != dim) throw ConfigError(data_at, "part dimensions do not add up to the model dimension");
        return Cone::product(std::move(parts));
    } catch (const Error& e) {
        throw ConfigError(data_at, e.what());
    }
}

json cone_to_json(const Cone& cone) {
    return std::visit(
        [&](const auto& c) -> json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, cone::FullSpace>) return {{"type", "full"}, {"data", c.dim}};
            else if constexpr (std::is_same_v<T, cone::Zero>) return {{"type", "zero"}, {"data", c.dim}};
            else if constexpr (std::is_same_v<T, cone::Orthant>) return {{"type", "orthant"}, {"data", c.dim}};
            else if constexpr (std::is_same_v<T, cone::Ray>) return {{"type", "ray"}, {"data", to_json(c.direction)}};
            else if constexpr (std::is_same_v<T, cone::Span>) {
                json d = json::array();
                for (Eigen::Index j = 0; j < c.basis.cols(); ++j) d.push_back(to_json(Vector(c.basis.col(j))));
                return {{"type", "span"}, {"data", d}};
            } else if constexpr (std::is_same_v<T, cone::Polyhedral>) {
                json d = json::array();
                for (Eigen::Index j = 0; j < c.generators.cols(); ++j) d.push_back(to_json(Vector(c.generators.col(j))));
                return {{"type", "polyhedral"}, {"data", d}};
            } else {
                json d = json::array();
                for (const Cone& p : c.parts) {
                    json pj = cone_to_json(p);
                    pj["dim"] = p.dim();
                    d.push_back(pj);
                }
                return {{"type", "product"}, {"data", d}};
            }
        },
        cone.variant());
}

}  // namespace mvcone::io
