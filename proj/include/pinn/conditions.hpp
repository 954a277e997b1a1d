#pragma once

#include <string>
#include <string_view>

namespace pinn {

enum class OptionStyle { EuropeanCall, AmericanPut };

std::string_view to_string(OptionStyle style);
/// Accepts "european_call" / "american_put"; throws DomainError otherwise.
OptionStyle parse_option_style(std::string_view name);

/// Contract and model parameters. Time runs on [0, maturity] with the payoff
/// enforced at t = maturity.
struct OptionSpec {
    OptionStyle style = OptionStyle::EuropeanCall;
    double strike = 40.0;
    double rate = 0.05;
    double sigma = 0.2;
    double maturity = 1.0;
    double s_min = 0.0;
    double s_max = 160.0;

    /// Throws DomainError unless 0 <= s_min < strike < s_max, maturity > 0, sigma > 0.
    void validate() const;

    bool operator==(const OptionSpec&) const = default;
};

enum class Boundary { Lower, Upper };

double payoff(const OptionSpec& spec, double spot);
double boundary_value(const OptionSpec& spec, Boundary which, double t);
double terminal_value(const OptionSpec& spec, double spot);

}  // namespace pinn
