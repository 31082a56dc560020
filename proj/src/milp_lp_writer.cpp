#include "rollcast/milp.hpp"

#include <cmath>
#include <iomanip>

namespace rollcast {

namespace {

std::string var_name(const Variable& v, int index) {
    return v.name.empty() ? "x" + std::to_string(index) : v.name;
}

void write_terms(std::ostream& out, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<Variable>& vars) {
    bool first = true;
    for (auto [vi, coef] : terms) {
        if (coef == 0.0) continue;
        if (first) {
            if (coef < 0) out << "- ";
            first = false;
        } else {
            out << (coef < 0 ? " - " : " + ");
        }
        double a = std::abs(coef);
        if (a != 1.0) out << a << " ";
        out << var_name(vars[vi], vi);
    }
    if (first) out << "0 " << var_name(vars[0], 0);
}

} // namespace

void write_lp(const MILPModel& model, std::ostream& out) {
    const auto& vars = model.variables();
    out << std::setprecision(17);

    out << "Minimize\n obj: ";
    std::vector<std::pair<int, double>> obj_terms;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (model.objective()[i] != 0.0) obj_terms.emplace_back(static_cast<int>(i), model.objective()[i]);
    write_terms(out, obj_terms, vars);
    out << "\nSubject To\n";

    int ci = 0;
    for (const auto& c : model.constraints()) {
        out << " " << (c.name.empty() ? "c" + std::to_string(ci) : c.name) << ": ";
        write_terms(out, c.coeffs, vars);
        switch (c.rel) {
            case Rel::LE: out << " <= "; break;
            case Rel::EQ: out << " = "; break;
            case Rel::GE: out << " >= "; break;
        }
        out << c.rhs << "\n";
        ++ci;
    }

    out << "Bounds\n";
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto& v = vars[i];
        if (v.type == VarType::Binary) continue;
        out << " ";
        if (std::isfinite(v.lb)) out << v.lb;
        else out << "-inf";
        out << " <= " << var_name(v, static_cast<int>(i)) << " <= ";
        if (std::isfinite(v.ub)) out << v.ub;
        else out << "+inf";
        out << "\n";
    }

    bool any_bin = false;
    for (const auto& v : vars)
        if (v.type == VarType::Binary) { any_bin = true; break; }
    if (any_bin) {
        out << "Binary\n";
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i].type == VarType::Binary) out << " " << var_name(vars[i], static_cast<int>(i)) << "\n";
    }
    out << "End\n";
}

} // namespace rollcast
