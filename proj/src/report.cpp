#include "seqcast/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "seqcast/core/csv.hpp"

namespace seqcast {

std::string predictions_csv(const std::vector<Prediction>& predictions) {
    std::string out = "date,y_true,y_pred\n";
    for (const Prediction& p : predictions) {
        out += p.target_date.to_string() + ',' + core::format_double(p.y_true) + ',' +
               core::format_double(p.y_pred) + '\n';
    }
    return out;
}

std::string loss_curve_csv(const std::vector<EpochLoss>& curve) {
    std::string out = "epoch,train_loss,test_loss\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out += std::to_string(i + 1) + ',' + core::format_double(curve[i].train_loss) + ',' +
               core::format_double(curve[i].test_loss) + '\n';
    }
    return out;
}

std::string shap_global_csv(const GlobalSummary& summary) {
    std::string out = "feature,mean_abs_shap\n";
    for (std::size_t i = 0; i < summary.feature_names.size(); ++i) {
        out += summary.feature_names[i] + ',' + core::format_double(summary.mean_abs_scores[i]) + '\n';
    }
    return out;
}

std::string local_explanation_csv(const Attribution& attribution, const core::Date& target_date) {
    std::string out;
    out += "method," + method_name(attribution.method) + '\n';
    out += "base_value," + core::format_double(attribution.base_value) + '\n';
    out += "prediction," + core::format_double(attribution.prediction) + '\n';
    out += "target_date," + target_date.to_string() + '\n';
    out += "feature,score\n";
    for (std::size_t i = 0; i < attribution.feature_names.size(); ++i) {
        out += attribution.feature_names[i] + ',' + core::format_double(attribution.scores[i]) + '\n';
    }
    return out;
}

// ---- SVG charts -----------------------------------------------------------------

namespace {

struct ChartSeries {
    std::string label;
    std::string color;
    const std::vector<double>* values;
};

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::vector<ChartSeries>& series) {
    constexpr double kW = 860, kH = 420;
    constexpr double kLeft = 78, kRight = 24, kTop = 48, kBottom = 46;
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;

    std::size_t n = 0;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& s : series) {
        n = std::max(n, s.values->size());
        for (double v : *s.values) {
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (n == 0) throw std::invalid_argument("cannot chart empty series");
    if (hi == lo) {
        hi += 0.5;
        lo -= 0.5;
    }

    const auto x_of = [&](std::size_t i) {
        return n == 1 ? kLeft + plot_w / 2
                      : kLeft + plot_w * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    const auto y_of = [&](double v) { return kTop + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(kW) + " " + num(kH) +
           "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg += "<rect width=\"" + num(kW) + "\" height=\"" + num(kH) + "\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"" + num(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
           title + "</text>\n";

    // gridlines and y tick labels
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        const double y = y_of(v);
        svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kW - kRight) +
               "\" y2=\"" + num(y) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) +
               "\" text-anchor=\"end\">" + tick_label(v) + "</text>\n";
    }
    // axes
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(kH - kBottom) + "\" stroke=\"#333333\"/>\n";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kH - kBottom) + "\" x2=\"" +
           num(kW - kRight) + "\" y2=\"" + num(kH - kBottom) + "\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + num(kLeft) + "\" y=\"" + num(kH - 14) + "\">1</text>\n";
    svg += "<text x=\"" + num(kW - kRight) + "\" y=\"" + num(kH - 14) +
           "\" text-anchor=\"end\">" + std::to_string(n) + "</text>\n";
    svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kH - 14) +
           "\" text-anchor=\"middle\">" + x_label + "</text>\n";

    // series polylines and legend
    double legend_x = kLeft + 8;
    for (const auto& s : series) {
        std::string points;
        for (std::size_t i = 0; i < s.values->size(); ++i) {
            points += num(x_of(i)) + "," + num(y_of((*s.values)[i])) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
        svg += "<rect x=\"" + num(legend_x) + "\" y=\"" + num(kTop - 14) +
               "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
        svg += "<text x=\"" + num(legend_x + 14) + "\" y=\"" + num(kTop - 5) + "\">" + s.label +
               "</text>\n";
        legend_x += 14.0 * static_cast<double>(s.label.size()) + 40.0;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace

std::string predictions_svg(const std::vector<Prediction>& predictions, const std::string& title) {
    std::vector<double> y_true, y_pred;
    y_true.reserve(predictions.size());
    y_pred.reserve(predictions.size());
    for (const Prediction& p : predictions) {
        y_true.push_back(p.y_true);
        y_pred.push_back(p.y_pred);
    }
    return line_chart(title, "test day", {{"actual", "#1f77b4", &y_true}, {"predicted", "#d62728", &y_pred}});
}

std::string loss_curve_svg(const std::vector<EpochLoss>& curve, const std::string& title) {
    std::vector<double> train, test;
    train.reserve(curve.size());
    test.reserve(curve.size());
    for (const EpochLoss& e : curve) {
        train.push_back(e.train_loss);
        test.push_back(e.test_loss);
    }
    return line_chart(title, "epoch", {{"train", "#1f77b4", &train}, {"test", "#d62728", &test}});
}

}  // namespace seqcast
