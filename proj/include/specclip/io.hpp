#ifndef SPECCLIP_IO_HPP
#define SPECCLIP_IO_HPP

#include <string>
#include <variant>

#include "specclip/clip.hpp"
#include "specclip/koopman.hpp"
#include "specclip/sysid.hpp"

namespace specclip {

/// Formats a double with 17 significant digits, enough to round-trip any
/// binary64 value through decimal text exactly.
std::string format_double(double value);

/// CSV with header `traj_id,t,x_0..x_{n-1}[,u_0..u_{m-1}]`, rows sorted by
/// (traj_id, t). For controlled datasets the input columns of each
/// trajectory's final row are written as 0 and ignored on load (inputs stop
/// one step before states).
void save_trajectories(const std::string& path, const TrajectoryDataset& dataset);
TrajectoryDataset load_trajectories(const std::string& path);

using AnyModel = std::variant<LinearModel, KoopmanModel>;

/// Models are stored as a single JSON document with fields schema_version,
/// n, m, eps, A (row-major nested arrays), optional B, optional lifting
/// {degree, n} (presence marks a Koopman model, in which case A holds K),
/// and optional clip_report. All floats carry 17 significant digits.
void save_model(const std::string& path, const LinearModel& model);
void save_model(const std::string& path, const KoopmanModel& model);
AnyModel load_model(const std::string& path);

}  // namespace specclip

#endif  // SPECCLIP_IO_HPP
