#pragma once

#include "rollcast/forecast.hpp"
#include "rollcast/rnn.hpp"

#include <map>
#include <memory>
#include <string>

namespace rollcast {

/// Self-describing model file: type tag plus every parameter and the
/// training config. AR/MA round-trip exactly; the network round-trips to
/// full double precision.
struct ModelFile {
    std::string type;  // "ar1" | "ma" | "rnn"
    std::map<std::string, Ar1Model> ar1;  // per series id
    std::map<std::string, MaModel> ma;    // per series id
    std::shared_ptr<RnnForecaster> rnn;

    std::string to_json() const;
    static ModelFile from_json(const std::string& text);

    void save(const std::string& path) const;
    static ModelFile load(const std::string& path);
};

} // namespace rollcast
