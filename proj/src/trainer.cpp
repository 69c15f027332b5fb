#include "ligo/trainer.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ligo {

void write_metrics_header(std::ostream& os) {
    os << "step,tokens_seen,flops_cum,wall_s,train_loss,eval_loss\n";
}

void write_metrics_row(std::ostream& os, const MetricsRecord& rec) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%" PRId64 ",%" PRIu64 ",%" PRIu64 ",%.3f,%.17g,", rec.step,
                  rec.tokens_seen, rec.flops_cum, rec.wall_s, rec.train_loss);
    os << buf;
    if (rec.eval_loss) {
        std::snprintf(buf, sizeof(buf), "%.17g", *rec.eval_loss);
        os << buf;
    }
    os << "\n";
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot read metrics csv: " + path.string());
    std::string line;
    if (!std::getline(f, line) || line != "step,tokens_seen,flops_cum,wall_s,train_loss,eval_loss")
        throw io_error("metrics csv " + path.string() + " has an unexpected header");
    std::vector<MetricsRecord> out;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t at = 0;
        while (true) {
            const std::size_t comma = line.find(',', at);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(at));
                break;
            }
            fields.push_back(line.substr(at, comma - at));
            at = comma + 1;
        }
        if (fields.size() != 6)
            throw io_error("metrics csv " + path.string() + ": line " +
                           std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                           " fields");
        try {
            MetricsRecord rec;
            rec.step = std::stoll(fields[0]);
            rec.tokens_seen = std::stoull(fields[1]);
            rec.flops_cum = std::stoull(fields[2]);
            rec.wall_s = std::stod(fields[3]);
            rec.train_loss = std::stod(fields[4]);
            if (!fields[5].empty()) rec.eval_loss = std::stod(fields[5]);
            out.push_back(rec);
        } catch (const std::logic_error&) {
            throw io_error("metrics csv " + path.string() + ": bad number on line " +
                           std::to_string(line_no));
        }
    }
    return out;
}

CompareReport compare_runs(const std::vector<RunCurve>& runs, double target_loss,
                           const std::string& reference_name) {
    if (runs.size() < 2) throw spec_error("compare_runs: need at least two runs");
    CompareReport report;
    report.target_loss = target_loss;

    for (const RunCurve& run : runs) {
        RunComparison row;
        row.name = run.name;
        bool has_eval = false;
        for (const MetricsRecord& rec : run.records) {
            if (!rec.eval_loss) continue;
            has_eval = true;
            if (*rec.eval_loss <= target_loss) {
                row.reached = true;
                row.flops_to_target = rec.flops_cum;
                row.wall_to_target = rec.wall_s;
                break;
            }
        }
        if (!has_eval)
            throw data_error("compare_runs: run '" + run.name + "' has no eval records");
        report.rows.push_back(row);
    }

    report.all_reached =
        std::all_of(report.rows.begin(), report.rows.end(),
                    [](const RunComparison& r) { return r.reached; });

    // pick the reference
    const RunComparison* ref = nullptr;
    if (!reference_name.empty()) {
        for (const RunComparison& r : report.rows)
            if (r.name == reference_name) ref = &r;
        if (!ref)
            throw spec_error("compare_runs: reference run '" + reference_name +
                             "' not among the inputs");
        if (!ref->reached)
            throw data_error("compare_runs: reference run '" + reference_name +
                             "' never reaches the target loss");
    } else {
        for (const RunComparison& r : report.rows) {
            if (!r.reached) continue;
            if (!ref || r.flops_to_target > ref->flops_to_target ||
                (r.flops_to_target == ref->flops_to_target && r.name < ref->name))
                ref = &r;
        }
    }

    if (ref) {
        report.reference = ref->name;
        for (RunComparison& r : report.rows) {
            r.is_reference = (&r == ref);
            if (r.reached && ref->flops_to_target > 0)
                r.savings_pct =
                    100.0 * (1.0 - double(r.flops_to_target) / double(ref->flops_to_target));
        }
    }
    return report;
}

std::string format_compare_report(const CompareReport& report) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "target eval loss: %.6g\n", report.target_loss);
    os << buf;
    os << "run                        flops_to_target   wall_to_target   savings\n";
    for (const RunComparison& r : report.rows) {
        if (r.reached) {
            std::snprintf(buf, sizeof(buf), "%-26s %15" PRIu64 " %16.3f %8.1f%%%s\n",
                          r.name.c_str(), r.flops_to_target, r.wall_to_target, r.savings_pct,
                          r.is_reference ? "  (reference)" : "");
        } else {
            std::snprintf(buf, sizeof(buf), "%-26s %15s %16s %9s\n", r.name.c_str(),
                          "never", "-", "-");
        }
        os << buf;
    }
    return os.str();
}

void write_compare_csv(std::ostream& os, const CompareReport& report) {
    os << "run,reached,flops_to_target,wall_to_target,savings_pct,is_reference\n";
    char buf[256];
    for (const RunComparison& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%" PRIu64 ",%.3f,%.1f,%d\n", r.name.c_str(),
                      r.reached ? 1 : 0, r.flops_to_target, r.wall_to_target, r.savings_pct,
                      r.is_reference ? 1 : 0);
        os << buf;
    }
}

} // namespace ligo
