#include "mlrate/report_io.hpp"

#include <charconv>

namespace mlrate {

using nlohmann::json;

json report_to_json(const EstimateReport& report) {
    json j;
    j["method"] = report.method;
    j["estimate"] = report.estimate;
    j["std_error"] = report.std_error;
    j["ci_level"] = report.ci_level;
    j["ci"] = {report.ci_lower, report.ci_upper};
    j["n"] = report.n;
    j["p_hat"] = report.p_hat;
    j["sigma2_hat"] = report.sigma2_hat;
    j["degenerate"] = report.degenerate;
    j["diagnostics"] = {{"corr_y_g", report.corr_y_g}, {"var_g", report.var_g}};
    return j;
}

json study_to_json(const CoverageStudyResult& result) {
    json methods = json::array();
    for (const auto& s : result.summaries) {
        json m;
        m["name"] = s.name;
        m["reps_ok"] = s.reps_ok;
        m["failures"] = s.failures;
        m["coverage"] = s.coverage;
        m["coverage_half_width"] = s.coverage_half_width;
        m["mean_width"] = s.mean_width;
        if (s.mean_relative_width.has_value()) {
            m["mean_relative_width"] = *s.mean_relative_width;
        } else {
            m["mean_relative_width"] = nullptr;
        }
        m["within_nominal_band"] = s.within_nominal_band;
        methods.push_back(std::move(m));
    }
    json j;
    j["reps"] = result.reps;
    j["level"] = result.level;
    j["true_ate"] = result.true_ate;
    j["baseline"] = result.baseline;
    j["valid"] = result.valid;
    j["methods"] = std::move(methods);
    return j;
}

namespace {

void append_double(std::ostream& out, double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.write(buf, ptr - buf);
}

}  // namespace

void study_records_csv(std::ostream& out, const CoverageStudyResult& result,
                       const std::vector<MethodSpec>& methods) {
    out << "rep,method,estimate,ci_lower,ci_upper,width,covered,failed\n";
    for (const auto& r : result.records) {
        out << r.rep << ',' << methods[r.method_index].name << ',';
        append_double(out, r.estimate);
        out << ',';
        append_double(out, r.ci_lower);
        out << ',';
        append_double(out, r.ci_upper);
        out << ',';
        append_double(out, r.width);
        out << ',' << (r.covered ? 1 : 0) << ',' << (r.failed ? 1 : 0) << '\n';
    }
}

}  // namespace mlrate
