#include "specclip/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace specclip {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

double parse_double(const std::string& text, int line) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError("line " + std::to_string(line) + ": '" + text + "' is not a number");
    }
    return value;
}

long parse_long(const std::string& text, int line) {
    long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError("line " + std::to_string(line) + ": '" + text + "' is not an integer");
    }
    return value;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    fields.push_back(current);
    return fields;
}

void write_matrix_json(std::ostream& out, const RealMatrix& M, const char* indent) {
    out << "[";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        if (i > 0) {
            out << ",";
        }
        out << "\n" << indent << "  [";
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) {
                out << ", ";
            }
            out << format_double(M(i, j));
        }
        out << "]";
    }
    out << "\n" << indent << "]";
}

void write_clip_report_json(std::ostream& out, const ClipReport& report) {
    out << "{\n"
        << "    \"eps\": " << format_double(report.eps) << ",\n"
        << "    \"n_clipped\": " << report.n_clipped << ",\n"
        << "    \"radius_before\": " << format_double(report.radius_before) << ",\n"
        << "    \"radius_after\": " << format_double(report.radius_after) << ",\n"
        << "    \"perturbation_applied\": " << format_double(report.perturbation_applied) << ",\n"
        << "    \"cond_modal\": " << format_double(report.cond_modal) << "\n"
        << "  }";
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open '" + path + "' for writing");
    }
    return out;
}

const json& require_field(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) {
        throw ParseError("missing field '" + std::string(name) + "'");
    }
    return *it;
}

RealMatrix matrix_from_json(const json& value, const char* name) {
    if (!value.is_array() || value.empty()) {
        throw ParseError("field '" + std::string(name) + "' must be a nonempty array of rows");
    }
    const std::size_t rows = value.size();
    if (!value[0].is_array() || value[0].empty()) {
        throw ParseError("field '" + std::string(name) + "' rows must be nonempty arrays");
    }
    const std::size_t cols = value[0].size();
    RealMatrix M(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = value[i];
        if (!row.is_array() || row.size() != cols) {
            throw ParseError("field '" + std::string(name) + "' row " + std::to_string(i) +
                             " is ragged");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (!row[j].is_number()) {
                throw ParseError("field '" + std::string(name) + "' entry (" + std::to_string(i) +
                                 "," + std::to_string(j) + ") is not a number");
            }
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                row[j].get<double>();
        }
    }
    return M;
}

ClipReport clip_report_from_json(const json& value) {
    ClipReport report;
    report.eps = require_field(value, "eps").get<double>();
    report.n_clipped = require_field(value, "n_clipped").get<int>();
    report.radius_before = require_field(value, "radius_before").get<double>();
    report.radius_after = require_field(value, "radius_after").get<double>();
    report.perturbation_applied = require_field(value, "perturbation_applied").get<double>();
    report.cond_modal = require_field(value, "cond_modal").get<double>();
    return report;
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void save_trajectories(const std::string& path, const TrajectoryDataset& dataset) {
    dataset.validate();
    std::ofstream out = open_for_write(path);

    out << "traj_id,t";
    for (int i = 0; i < dataset.state_dim; ++i) {
        out << ",x_" << i;
    }
    for (int i = 0; i < dataset.input_dim; ++i) {
        out << ",u_" << i;
    }
    out << "\n";

    for (std::size_t j = 0; j < dataset.trajectories.size(); ++j) {
        const Trajectory& traj = dataset.trajectories[j];
        for (Eigen::Index t = 0; t < traj.states.cols(); ++t) {
            out << j << "," << t;
            for (int i = 0; i < dataset.state_dim; ++i) {
                out << "," << format_double(traj.states(i, t));
            }
            for (int i = 0; i < dataset.input_dim; ++i) {
                // no input on the final step; keep the grid rectangular
                const double u = t < traj.inputs.cols() ? traj.inputs(i, t) : 0.0;
                out << "," << format_double(u);
            }
            out << "\n";
        }
    }
    if (!out) {
        throw ParseError("failed while writing '" + path + "'");
    }
}

TrajectoryDataset load_trajectories(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("'" + path + "': missing header row");
    }
    const std::vector<std::string> header = split_csv(line);
    if (header.size() < 3 || header[0] != "traj_id" || header[1] != "t") {
        throw ParseError("'" + path + "': header must start with traj_id,t,x_0");
    }
    int n = 0;
    int m = 0;
    for (std::size_t i = 2; i < header.size(); ++i) {
        const std::string expected_x = "x_" + std::to_string(n);
        const std::string expected_u = "u_" + std::to_string(m);
        if (header[i] == expected_x && m == 0) {
            ++n;
        } else if (header[i] == expected_u && n > 0) {
            ++m;
        } else {
            throw ParseError("'" + path + "': unexpected header column '" + header[i] + "'");
        }
    }
    if (n == 0) {
        throw ParseError("'" + path + "': header has no state columns");
    }

    // rows keyed by (traj_id, t); trajectory ids must be 0..N-1
    std::map<long, std::map<long, std::vector<double>>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw ParseError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        const long traj_id = parse_long(fields[0], line_no);
        const long t = parse_long(fields[1], line_no);
        std::vector<double> values;
        values.reserve(fields.size() - 2);
        for (std::size_t i = 2; i < fields.size(); ++i) {
            values.push_back(parse_double(fields[i], line_no));
        }
        if (!rows[traj_id].emplace(t, std::move(values)).second) {
            throw ParseError("'" + path + "' line " + std::to_string(line_no) +
                             ": duplicate (traj_id, t)");
        }
    }

    TrajectoryDataset dataset;
    dataset.state_dim = n;
    dataset.input_dim = m;

    long expected_id = 0;
    for (const auto& [traj_id, steps] : rows) {
        if (traj_id != expected_id++) {
            throw ParseError("'" + path + "': trajectory ids must be contiguous from 0, found " +
                             std::to_string(traj_id));
        }
        const long T = static_cast<long>(steps.size());
        Trajectory traj;
        traj.states.resize(n, T);
        if (m > 0 && T >= 2) {
            traj.inputs.resize(m, T - 1);
        }
        long expected_t = 0;
        for (const auto& [t, values] : steps) {
            if (t != expected_t++) {
                throw ParseError("'" + path + "': trajectory " + std::to_string(traj_id) +
                                 " is missing step " + std::to_string(expected_t - 1));
            }
            for (int i = 0; i < n; ++i) {
                traj.states(i, t) = values[static_cast<std::size_t>(i)];
            }
            if (m > 0 && t < T - 1) {
                for (int i = 0; i < m; ++i) {
                    traj.inputs(i, t) = values[static_cast<std::size_t>(n + i)];
                }
            }
        }
        dataset.trajectories.push_back(std::move(traj));
    }

    dataset.validate();
    return dataset;
}

void save_model(const std::string& path, const LinearModel& model) {
    std::ofstream out = open_for_write(path);
    const int m = model.B ? static_cast<int>(model.B->cols()) : 0;

    out << "{\n";
    out << "  \"schema_version\": " << kSchemaVersion << ",\n";
    out << "  \"n\": " << model.A.rows() << ",\n";
    out << "  \"m\": " << m << ",\n";
    out << "  \"eps\": " << format_double(model.eps) << ",\n";
    if (model.clip_report) {
        out << "  \"clip_report\": ";
        write_clip_report_json(out, *model.clip_report);
        out << ",\n";
    }
    out << "  \"A\": ";
    write_matrix_json(out, model.A, "  ");
    if (model.B) {
        out << ",\n  \"B\": ";
        write_matrix_json(out, *model.B, "  ");
    }
    out << "\n}\n";
    if (!out) {
        throw ParseError("failed while writing '" + path + "'");
    }
}

void save_model(const std::string& path, const KoopmanModel& model) {
    std::ofstream out = open_for_write(path);

    out << "{\n";
    out << "  \"schema_version\": " << kSchemaVersion << ",\n";
    out << "  \"n\": " << model.spec.state_dim << ",\n";
    out << "  \"m\": 0,\n";
    out << "  \"eps\": " << format_double(model.eps) << ",\n";
    out << "  \"lifting\": {\"degree\": " << model.spec.degree << ", \"n\": "
        << model.spec.state_dim << "},\n";
    if (model.clip_report) {
        out << "  \"clip_report\": ";
        write_clip_report_json(out, *model.clip_report);
        out << ",\n";
    }
    out << "  \"A\": ";
    write_matrix_json(out, model.K, "  ");
    out << "\n}\n";
    if (!out) {
        throw ParseError("failed while writing '" + path + "'");
    }
}

AnyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("'" + path + "': top-level value must be an object");
    }

    const int version = require_field(doc, "schema_version").get<int>();
    if (version != kSchemaVersion) {
        throw VersionMismatch("'" + path + "': schema_version " + std::to_string(version) +
                              " is not supported (expected " + std::to_string(kSchemaVersion) +
                              ")");
    }

    const int n = require_field(doc, "n").get<int>();
    const int m = require_field(doc, "m").get<int>();
    const double eps = require_field(doc, "eps").get<double>();
    const RealMatrix A = matrix_from_json(require_field(doc, "A"), "A");

    std::optional<ClipReport> report;
    if (doc.contains("clip_report")) {
        report = clip_report_from_json(doc["clip_report"]);
    }

    if (doc.contains("lifting")) {
        const json& lifting = doc["lifting"];
        const int degree = require_field(lifting, "degree").get<int>();
        const int ln = require_field(lifting, "n").get<int>();
        if (ln != n) {
            throw ParseError("'" + path + "': lifting.n disagrees with n");
        }
        KoopmanModel model;
        model.spec = make_lifting_spec(n, degree);
        if (A.rows() != model.spec.lifted_dim() || A.cols() != model.spec.lifted_dim()) {
            throw ParseError("'" + path + "': A must be " +
                             std::to_string(model.spec.lifted_dim()) + "x" +
                             std::to_string(model.spec.lifted_dim()) + " for this lifting");
        }
        model.K = A;
        model.eps = eps;
        model.clip_report = report;
        return model;
    }

    if (A.rows() != n || A.cols() != n) {
        throw ParseError("'" + path + "': A must be " + std::to_string(n) + "x" +
                         std::to_string(n));
    }
    LinearModel model;
    model.A = A;
    model.eps = eps;
    model.clip_report = report;
    if (m > 0) {
        const RealMatrix B = matrix_from_json(require_field(doc, "B"), "B");
        if (B.rows() != n || B.cols() != m) {
            throw ParseError("'" + path + "': B must be " + std::to_string(n) + "x" +
                             std::to_string(m));
        }
        model.B = B;
    }
    return model;
}

}  // namespace specclip
