#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pulsestab/bloch.hpp"
#include "pulsestab/contour.hpp"
#include "pulsestab/evolve.hpp"
#include "pulsestab/hifreq.hpp"

namespace pulsestab {

using json = nlohmann::json;

/// Locale-independent, round-trip (17 significant digits) formatting.
std::string format_double(double v);

/// {"kind","F","nu","r","s","cs","p","c","q"}; kind is "st_venant" or "jin_xin".
json model_wave_to_json(const ModelSpec& model, const WaveParams& wave);

/// Reads model and wave from a flat object. Unknown keys raise ValidationError; missing
/// wave keys leave the defaults in place.
void model_wave_from_json(const json& j, ModelSpec& model, WaveParams& wave);

json profile_to_json(const ProfileSolution& profile);
ProfileSolution profile_from_json(const json& j);
void save_profile(const ProfileSolution& profile, const std::filesystem::path& file);
ProfileSolution load_profile(const std::filesystem::path& file);

json read_json(const std::filesystem::path& file);
void write_json(const std::filesystem::path& file, const json& j);

/// re_lambda, im_lambda, re_D, im_D, log_radius
void write_evans_csv(const std::filesystem::path& file, std::span<const EvansEvaluation> rows);
/// xi, re_lambda, im_lambda, N, period
void write_bloch_csv(const std::filesystem::path& file, const std::vector<BlochSample>& samples, double period);
/// k, re_lambda, im_lambda (both roots per k)
void write_dispersion_csv(const std::filesystem::path& file, const EssentialSpectrum& spectrum);
void write_convergence_csv(const std::filesystem::path& file, const std::vector<ConvergenceEntry>& rows);

json hf_to_json(const HfCoefficients& coeffs, const HfBound& bound);
json diagnostics_to_json(const MetastabilityDiagnostics& d);

/// metadata.json, snapshot_NNNN.csv (x, tau, u) and diagnostics.json under dir.
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result, const json& metadata);

}  // namespace pulsestab
