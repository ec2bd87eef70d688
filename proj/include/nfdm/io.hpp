#pragma once

#include "nfdm/core.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace nfdm {

inline constexpr int kSchemaVersion = 1;

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

void write_signal_csv(std::ostream& os, const TimeSignal& s);
TimeSignal read_signal_csv(std::istream& is);

nlohmann::json signal_to_json(const TimeSignal& s);
TimeSignal signal_from_json(const nlohmann::json& j);

nlohmann::json spectrum_to_json(const DiscreteSpectrum& ds, const ContinuousSpectrum* cs = nullptr);
DiscreteSpectrum discrete_from_json(const nlohmann::json& j);
ContinuousSpectrum continuous_from_json(const nlohmann::json& j);

// Reads a signal from .csv or .json according to the file extension.
TimeSignal load_signal(const std::string& path);
void save_signal(const std::string& path, const TimeSignal& s);

std::string read_text_file(const std::string& path);

}  // namespace nfdm
