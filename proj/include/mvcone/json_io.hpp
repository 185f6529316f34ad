/**
 * @file json_io.hpp
 * @brief JSON documents for models, cones and batch run configurations
 *
 * Model:  {"dim": 1, "drift": [..], "diffusion": [[..]], "jumps": [{"u": [..], "lambda": 1.0}], "horizon": 1.0}
 * Cone:   {"type": "orthant"|"full"|"zero"|"ray"|"span"|"polyhedral"|"product", "data": ...}
 *
 * Cone data: nothing (or the dimension) for full/zero/orthant, a vector for
 * ray, a list of vectors for span and polyhedral, a list of cone documents
 * for product.
 */

#pragma once

#include "mvcone/cones.hpp"
#include "mvcone/model.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace mvcone::io {

/// A configuration document is malformed. field() is a JSON-pointer-like path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error("field '" + field + "': " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Library validation errors (NotPSD, DimensionMismatch, ...) are rethrown as
/// ConfigError tagged with `where`.
LevyModel model_from_json(const nlohmann::json& doc, const std::string& where = "model");
nlohmann::json model_to_json(const LevyModel& model);

Cone cone_from_json(const nlohmann::json& doc, int dim, const std::string& where = "cone");
nlohmann::json cone_to_json(const Cone& cone);

/// Parses text, reporting syntax errors as ConfigError on `where`.
nlohmann::json parse_document(const std::string& text, const std::string& where);

}  // namespace mvcone::io
