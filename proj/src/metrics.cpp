#include "seqcast/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "seqcast/core/csv.hpp"

namespace seqcast {

MetricsReport evaluate(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw std::invalid_argument("evaluate: y_true has " + std::to_string(y_true.size()) +
                                    " points but y_pred has " + std::to_string(y_pred.size()));
    }
    const std::size_t n = y_true.size();
    if (n < 2) throw std::invalid_argument("evaluate needs at least 2 points");

    bool constant = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (y_true[i] != y_true[0]) constant = false;
        if (y_true[i] == 0.0) {
            throw std::domain_error("MAPE undefined: y_true contains zero at index " +
                                    std::to_string(i));
        }
    }
    if (constant) throw std::domain_error("R^2 undefined: y_true is constant");

    double mean = 0.0;
    for (double v : y_true) mean += v;
    mean /= static_cast<double>(n);

    double sse = 0.0, sae = 0.0, sape = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double err = y_true[i] - y_pred[i];
        sse += err * err;
        sae += std::fabs(err);
        sape += std::fabs(err) / std::fabs(y_true[i]);
        const double dev = y_true[i] - mean;
        sst += dev * dev;
    }

    MetricsReport r;
    r.n = n;
    r.mse = sse / static_cast<double>(n);
    r.mae = sae / static_cast<double>(n);
    r.mape_percent = 100.0 * sape / static_cast<double>(n);
    r.rmse = std::sqrt(r.mse);
    r.r2 = 1.0 - sse / sst;
    return r;
}

std::string format_metric(double value) {
    if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", value);
    std::string s = buf;
    if (s.find('e') != std::string::npos || s.find('E') != std::string::npos) {
        // magnitude far outside the 4-decimal window; no decimal tie possible
        std::snprintf(buf, sizeof buf, "%.4f", value);
        s = buf;
        return s == "-0.0000" ? "0.0000" : s;
    }

    const bool neg = !s.empty() && s[0] == '-';
    if (neg) s.erase(0, 1);
    std::string ipart = s, fpart;
    if (const auto dot = s.find('.'); dot != std::string::npos) {
        ipart = s.substr(0, dot);
        fpart = s.substr(dot + 1);
    }
    while (fpart.size() < 5) fpart += '0';

    std::string digits = ipart + fpart.substr(0, 4);
    if (fpart[4] >= '5') {  // round half away from zero on the decimal form
        int i = static_cast<int>(digits.size()) - 1;
        for (; i >= 0; --i) {
            if (digits[static_cast<std::size_t>(i)] == '9') {
                digits[static_cast<std::size_t>(i)] = '0';
            } else {
                ++digits[static_cast<std::size_t>(i)];
                break;
            }
        }
        if (i < 0) digits.insert(digits.begin(), '1');
    }

    std::string frac = digits.substr(digits.size() - 4);
    std::string whole = digits.substr(0, digits.size() - 4);
    const auto nz = whole.find_first_not_of('0');
    whole = nz == std::string::npos ? "0" : whole.substr(nz);
    std::string out = whole + "." + frac;
    if (neg && out != "0.0000") out.insert(out.begin(), '-');
    return out;
}

std::string metrics_table(const std::map<std::string, MetricsReport>& per_symbol) {
    if (per_symbol.empty()) throw std::invalid_argument("metrics_table needs at least one symbol");
    std::string out = "symbol,mse,mae,mape_percent,rmse,r2\n";
    for (const auto& [symbol, m] : per_symbol) {  // std::map iterates lexicographically
        out += symbol + ',' + format_metric(m.mse) + ',' + format_metric(m.mae) + ',' +
               format_metric(m.mape_percent) + ',' + format_metric(m.rmse) + ',' +
               format_metric(m.r2) + '\n';
    }
    return out;
}

std::string metrics_json(const MetricsReport& report) {
    std::string out = "{\n";
    out += "  \"mse\": " + core::format_double(report.mse) + ",\n";
    out += "  \"mae\": " + core::format_double(report.mae) + ",\n";
    out += "  \"mape_percent\": " + core::format_double(report.mape_percent) + ",\n";
    out += "  \"rmse\": " + core::format_double(report.rmse) + ",\n";
    out += "  \"r2\": " + core::format_double(report.r2) + ",\n";
    out += "  \"n\": " + std::to_string(report.n) + "\n";
    out += "}\n";
    return out;
}

}  // namespace seqcast
