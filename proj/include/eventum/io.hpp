// io.hpp — model definition files, event logs, time series, reports
//
// Classical labels are one-based in every file format and log; the library
// is zero-based internally. All doubles are written with %.17g (round-trip
// exact), so identical runs produce byte-identical files.

#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eventum/ensemble.hpp"
#include "eventum/errors.hpp"
#include "eventum/lindblad.hpp"
#include "eventum/model.hpp"
#include "eventum/pdp.hpp"

namespace eventum {

using Json = nlohmann::ordered_json;

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// --------------------------- model definition ------------------------------

namespace detail {

inline Matrix parse_complex_matrix(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) {
        throw UsageError(what + ": expected a non-empty array of rows");
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw UsageError(what + ": ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const Json& e = j[r][c];
            if (!e.is_array() || e.size() != 2) {
                throw UsageError(what + ": entries must be [re, im] pairs");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

inline void reject_unknown_keys(const Json& j,
                                const std::vector<std::string>& known,
                                const std::string& context) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const auto& k : known) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw UsageError(context + ": unknown key '" + item.key() + "'");
        }
    }
}

/// Scalar time profiles for file-defined time-dependent couplings.
inline std::function<double(double)> parse_time_scale(const Json& j) {
    reject_unknown_keys(j, {"kind", "offset", "amplitude", "omega", "phase"},
                        "time_dependence");
    const std::string kind = j.at("kind").get<std::string>();
    const double offset = j.value("offset", 0.0);
    const double amplitude = j.value("amplitude", 0.0);
    const double omega = j.value("omega", 1.0);
    const double phase = j.value("phase", 0.0);
    if (kind == "sinusoidal") {
        return [=](double t) {
            return offset + amplitude * std::sin(omega * t + phase);
        };
    }
    if (kind == "sqrt_sinusoidal") {
        // Scales a coupling so the event RATE follows the sinusoid.
        return [=](double t) {
            return std::sqrt(
                std::max(0.0, offset + amplitude * std::sin(omega * t + phase)));
        };
    }
    throw UsageError("time_scale: unknown kind '" + kind + "'");
}

}  // namespace detail

/// Parse a generic model definition (JSON object with m, dims, hamiltonians,
/// couplings). Labels in the file are one-based.
inline HybridModel load_model_json(const Json& j) {
    detail::reject_unknown_keys(
        j, {"m", "dims", "hamiltonians", "couplings", "hermiticity_tol",
            "validation_times"},
        "model");
    HybridModelSpec spec;
    spec.m = j.at("m").get<int>();
    spec.dims = j.at("dims").get<std::vector<int>>();
    spec.hermiticity_tol = j.value("hermiticity_tol", 1e-10);

    if (j.contains("hamiltonians")) {
        const Json& hs = j.at("hamiltonians");
        if (!hs.is_array() || static_cast<int>(hs.size()) != spec.m) {
            throw UsageError("model: hamiltonians must list one entry per state");
        }
        for (int a = 0; a < spec.m; ++a) {
            const Json& h = hs[static_cast<std::size_t>(a)];
            if (h.is_string()) {
                if (h.get<std::string>() != "zero") {
                    throw UsageError("model: unknown hamiltonian builtin '" +
                                     h.get<std::string>() + "'");
                }
                spec.hamiltonians.emplace_back();
            } else {
                const Matrix m = detail::parse_complex_matrix(
                    h, "hamiltonian " + std::to_string(a + 1));
                spec.hamiltonians.push_back([m](double) { return m; });
            }
        }
    }

    for (const Json& cj : j.value("couplings", Json::array())) {
        detail::reject_unknown_keys(
            cj, {"from", "to", "matrix", "builtin", "scale", "time_dependence"},
            "coupling");
        CouplingSpec c;
        c.from = cj.at("from").get<int>() - 1;  // one-based in files
        c.to = cj.at("to").get<int>() - 1;
        if (c.from < 0 || c.from >= spec.m || c.to < 0 || c.to >= spec.m) {
            throw UsageError("coupling: from/to outside 1.." +
                             std::to_string(spec.m));
        }
        const double scale = cj.value("scale", 1.0);
        Matrix base;
        if (cj.contains("matrix")) {
            base = detail::parse_complex_matrix(cj.at("matrix"), "coupling");
        } else if (cj.contains("builtin")) {
            const std::string b = cj.at("builtin").get<std::string>();
            if (b != "identity") {
                throw UsageError("coupling: unknown builtin '" + b + "'");
            }
            base = Matrix::Identity(spec.dims[static_cast<std::size_t>(c.to)],
                                    spec.dims[static_cast<std::size_t>(c.from)]);
        } else {
            throw UsageError("coupling: need matrix or builtin");
        }
        base *= scale;
        if (cj.contains("time_dependence")) {
            const auto profile = detail::parse_time_scale(cj.at("time_dependence"));
            c.matrix = [base, profile](double t) { return profile(t) * base; };
            spec.time_dependent = true;
        } else {
            c.matrix = [base](double) { return base; };
        }
        spec.couplings.push_back(std::move(c));
    }

    if (j.contains("validation_times")) {
        spec.validation_times = j.at("validation_times").get<std::vector<double>>();
    } else if (spec.time_dependent) {
        spec.validation_times = {0.0, 0.5, 1.0};
    }
    return build_model(std::move(spec));
}

inline HybridModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open model file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw UsageError("model file '" + path + "': " + e.what());
    }
    return load_model_json(j);
}

// ------------------------------ event logs ---------------------------------

/// One JSONL record per event: {trajectory, seed, t, from, to,
/// norm_sq_at_jump}; labels one-based.
inline void write_events_jsonl(std::ostream& out,
                               const std::vector<TrajectoryRecord>& records) {
    for (const auto& rec : records) {
        for (const auto& ev : rec.events) {
            Json line;
            line["trajectory"] = rec.stream_index;
            line["seed"] = rec.master_seed;
            line["t"] = ev.time;
            line["from"] = ev.from_state + 1;
            line["to"] = ev.to_state + 1;
            line["norm_sq_at_jump"] = ev.pre_jump_norm_sq;
            out << line.dump() << "\n";
        }
    }
}

inline void write_summary_csv(std::ostream& out,
                              const std::vector<TrajectoryRecord>& records) {
    out << "trajectory,n_events,final_alpha,survival_norm_sq\n";
    for (const auto& rec : records) {
        out << rec.stream_index << "," << rec.events.size() << ","
            << rec.final_state.alpha + 1 << ","
            << fmt_double(rec.final_survival_norm_sq) << "\n";
    }
}

// ------------------------------ time series --------------------------------

/// CSV rows t, Tr rho_b, purity Tr rho_b^2 per block; `with_entries` appends
/// the flattened block entries.
inline void write_timeseries_csv(std::ostream& out,
                                 const std::vector<DensityFamily>& series,
                                 bool with_entries = false) {
    if (series.empty()) return;
    const std::size_t m = series.front().blocks.size();
    out << "t";
    for (std::size_t b = 0; b < m; ++b) out << ",tr_" << b + 1;
    for (std::size_t b = 0; b < m; ++b) out << ",purity_" << b + 1;
    if (with_entries) {
        for (std::size_t b = 0; b < m; ++b) {
            const auto& blk = series.front().blocks[b];
            for (Eigen::Index i = 0; i < blk.rows(); ++i) {
                for (Eigen::Index k = 0; k < blk.cols(); ++k) {
                    out << ",re_" << b + 1 << "_" << i + 1 << "_" << k + 1
                        << ",im_" << b + 1 << "_" << i + 1 << "_" << k + 1;
                }
            }
        }
    }
    out << "\n";
    for (const auto& fam : series) {
        out << fmt_double(fam.t);
        for (std::size_t b = 0; b < m; ++b) {
            out << "," << fmt_double(fam.block_trace(static_cast<int>(b)));
        }
        for (std::size_t b = 0; b < m; ++b) {
            out << "," << fmt_double(fam.block_purity(static_cast<int>(b)));
        }
        if (with_entries) {
            for (std::size_t b = 0; b < m; ++b) {
                const auto& blk = fam.blocks[b];
                for (Eigen::Index i = 0; i < blk.rows(); ++i) {
                    for (Eigen::Index k = 0; k < blk.cols(); ++k) {
                        out << "," << fmt_double(blk(i, k).real()) << ","
                            << fmt_double(blk(i, k).imag());
                    }
                }
            }
        }
        out << "\n";
    }
}

// ------------------------------- reports -----------------------------------

inline Json convergence_report_json(const ConvergenceReport& report) {
    Json j;
    j["checkpoints"] = report.checkpoints;
    j["N"] = report.n_list;
    j["trace_distances"] = report.trace_distances;
    j["fitted_slope"] = report.fitted_slope;
    j["pass"] = report.slope_in_band;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file '" + path + "'");
    out << body;
}

}  // namespace eventum
