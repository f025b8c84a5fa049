#include "paramest/registry.hpp"

#include <algorithm>

namespace paramest {

namespace {

struct Source {
    const char* name;
    const char* dsl;
    IdentifiabilityClass identifiability;
    std::vector<std::string> excluded;
};

const Source sources[] = {
    {"harmonic", R"(states: x1, x2
parameters: a, b
equations:
  x1' = -a*x2
  x2' = x1/b
outputs:
  y1 = x1
  y2 = x2
)",
     IdentifiabilityClass::global, {}},
    {"vanderpol", R"(states: x1, x2
parameters: a, b
equations:
  x1' = a*x2
  x2' = -x1 - b*(x1^2 - 1)*x2
outputs:
  y1 = x1
  y2 = x2
)",
     IdentifiabilityClass::global, {}},
    {"fitzhugh_nagumo", R"(states: V, R
parameters: g, a, b
equations:
  V' = g*(V - V^3/3 + R)
  R' = (V - a + b*R)/g
outputs:
  y1 = V
)",
     IdentifiabilityClass::global, {}},
    {"hiv", R"(states: x, y, v, w, z
parameters: lm, d, beta, a, k, u, c, q, b, h
equations:
  x' = lm - d*x - beta*x*v
  y' = beta*x*v - a*y
  v' = k*y - u*v
  w' = c*x*y*w - c*q*y*w - b*w
  z' = c*q*y*w - h*z
outputs:
  y1 = w
  y2 = z
  y3 = x
  y4 = y + v
)",
     IdentifiabilityClass::global, {}},
    {"mammillary3", R"(states: x1, x2, x3
parameters: a12, a13, a21, a31, a01
equations:
  x1' = -(a21 + a31 + a01)*x1 + a12*x2 + a13*x3
  x2' = a21*x1 - a12*x2
  x3' = a31*x1 - a13*x3
outputs:
  y1 = x1
  y2 = x2
)",
     IdentifiabilityClass::global, {}},
    {"lotka_volterra", R"(states: r, w
parameters: k1, k2, k3
equations:
  r' = k1*r - k2*r*w
  w' = k2*r*w - k3*w
outputs:
  y1 = r
)",
     IdentifiabilityClass::global, {}},
    {"crauste", R"(states: N, E, S, M, P
parameters: mu_N, mu_EE, mu_LE, mu_LL, mu_M, mu_P, mu_PE, mu_PL, delta_NE, delta_EL, delta_LM, rho_E, rho_P
equations:
  N' = -mu_N*N - delta_NE*N*P
  E' = delta_NE*N*P - mu_EE*E^2 - delta_EL*E + rho_E*E*P
  S' = delta_EL*S - S*delta_LM - mu_LL*S^2 - mu_LE*E*S
  M' = delta_LM*S - mu_M*M
  P' = rho_P*P^2 - mu_P*P - mu_PE*E*P - mu_PL*S*P
outputs:
  y1 = N
  y2 = E
  y3 = S + M
  y4 = P
)",
     IdentifiabilityClass::global, {}},
    {"biohydrogenation", R"(states: x4, x5, x6, x7
parameters: k5, k6, k7, k8, k9, k10
equations:
  x4' = -k5*x4/(k6 + x4)
  x5' = k5*x4/(k6 + x4) - k7*x5/(k8 + x5 + x6)
  x6' = k7*x5/(k8 + x5 + x6) - k9*x6*(k10 - x6)/k10
  x7' = k9*x6*(k10 - x6)/k10
outputs:
  y1 = x4
  y2 = x5
)",
     IdentifiabilityClass::local, {"x7"}},
    {"mammillary4", R"(states: x1, x2, x3, x4
parameters: k01, k12, k13, k14, k21, k31, k41
equations:
  x1' = -k01*x1 + k12*x2 + k13*x3 + k14*x4 - k21*x1 - k31*x1 - k41*x1
  x2' = -k12*x2 + k21*x1
  x3' = -k13*x3 + k31*x1
  x4' = -k14*x4 + k41*x1
outputs:
  y1 = x1
  y2 = x2
  y3 = x3 + x4
)",
     IdentifiabilityClass::local, {}},
    {"seir", R"(states: S, E, I, N
parameters: a, b, nu
equations:
  S' = -b*S*I/N
  E' = b*S*I/N - nu*E
  I' = nu*E - a*I
  N' = 0
outputs:
  y1 = I
  y2 = N
)",
     IdentifiabilityClass::local, {}},
};

const char* const example_text = R"(states: x
parameters: mu
equations:
  x' = -mu*x
outputs:
  y1 = x^2 + x
)";

std::vector<ModelRegistryEntry> build() {
    std::vector<ModelRegistryEntry> out;
    for (const Source& s : sources) {
        OdeModel m = parse_model(s.dsl);
        std::vector<std::string> unknowns;
        for (const auto& p : m.parameters()) unknowns.push_back(p);
        for (const auto& x : m.states())
            if (std::find(s.excluded.begin(), s.excluded.end(), x) == s.excluded.end()) unknowns.push_back(x);
        out.push_back({s.name, s.dsl, std::move(m), std::move(unknowns), s.identifiability});
    }
    return out;
}

}  // namespace

const std::vector<ModelRegistryEntry>& registry() {
    static const std::vector<ModelRegistryEntry> entries = build();
    return entries;
}

const ModelRegistryEntry& registry_entry(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return e;
    throw ModelError("unknown registry model '" + name + "'");
}

std::vector<std::string> registry_names() {
    std::vector<std::string> names;
    for (const auto& e : registry()) names.push_back(e.name);
    return names;
}

const OdeModel& example_model() {
    static const OdeModel m = parse_model(example_text);
    return m;
}

const char* example_model_text() { return example_text; }

}  // namespace paramest
