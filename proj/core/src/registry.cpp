#include "wlab/registry.hpp"

#include <array>

namespace wlab {

namespace {

constexpr std::array kChecks{
    CheckInfo{"operator_structure", "integration by parts",
              "int <grad u, grad v> dmu = -int (Lu) v dmu", CheckStage::level},
    CheckInfo{"bochner", "Eq. (1)",
              "L|grad u|^2 - 2<grad u, grad Lu> = 2|Hess u|^2 + 2Ric(L)(grad u, grad u)",
              CheckStage::refinement},
    CheckInfo{"kernel_mehler", "Mehler formula",
              "p_t(x, y) on Gaussian space equals the Ornstein-Uhlenbeck kernel", CheckStage::level},
    CheckInfo{"stochastic_completeness", "heat kernel",
              "int p_t(x, y) dmu(y) = 1 and p_t(x, y) = p_t(y, x)", CheckStage::level},
    CheckInfo{"hamilton_jacobi", "Eq. (16)", "dJ/dt + LJ + |grad J|^2 = 0, J = log p_{T-t}(., y)",
              CheckStage::refinement},
    CheckInfo{"bishop_gromov", "Eq. (23)",
              "mu(B(sqrt t))/mu(B(sqrt(t/2))) <= 2^{m/2} exp(sqrt((m-1)K) t)", CheckStage::level},
    CheckInfo{"relative_volume", "Eq. (12)",
              "mu(B_y(sqrt t))/mu(B_x(sqrt t)) <= ((d + sqrt t)/sqrt t)^m exp(sqrt((m-1)K) d)",
              CheckStage::level},
    CheckInfo{"harnack_improved", "Eq. (2)", "|grad log u|^2 <= 2K/(1 - e^{-2Kt}) log(A/u)",
              CheckStage::level},
    CheckInfo{"harnack_hamilton", "Eq. (3)", "|grad log u|^2 <= (1/t + 2K) log(A/u)",
              CheckStage::level},
    CheckInfo{"lsi_semigroup", "Eq. (6)",
              "|grad P_T f|^2/P_T f <= 2K/(1 - e^{-2KT}) (P_T(f log f) - P_T f log P_T f)",
              CheckStage::level},
    CheckInfo{"harnack_drift_form", "Eq. (7)",
              "|grad log u|^2 <= C (1/t + K)(1 + log(A/u))", CheckStage::level},
    CheckInfo{"liouville", "Corollary 1.3",
              "every bounded L-harmonic function must be constant", CheckStage::level},
    CheckInfo{"kernel_gaussian_bounds", "Eq. (9)/(10)",
              "C2 e^{-(1+eps)lambda t}/mu(B) e^{-d^2/4(1-eps)t} <= p_t(x, y) <= "
              "C1/mu(B) e^{-d^2/4(1+eps)t + eps K t}",
              CheckStage::refinement},
    CheckInfo{"log_kernel_gradient", "Thm 1.4", "|grad log p_t(x, y)| <= C (d(x, y)/t + 1/sqrt t)",
              CheckStage::refinement},
    CheckInfo{"log_kernel_gradient_N2", "Thm 1.5",
              "|Hess log p_t(x, y)| <= C2 (d(x, y)/t + 1/sqrt t)^2", CheckStage::refinement},
    CheckInfo{"entropy_d2H", "Eq. (33)/(34)",
              "d2H/dt2 = -int (|Lu|^2/u - <grad Lu, grad u/u>) = -2 int (|Hess log u|^2 + "
              "Ric(L)(grad log u, grad log u)) u",
              CheckStage::refinement},
    CheckInfo{"hm_identity", "Eq. (36)", "d2H_m/dt2 = d2H/dt2 + m/(2t^2)", CheckStage::level},
    CheckInfo{"w_identity", "Eq. (37)", "W_m = d/dt (t H_m) = H_m + t dH_m/dt",
              CheckStage::level},
    CheckInfo{"w_monotonicity", "Thm 1.6", "dW_m/dt <= 0 when Ric_{m,n}(L) >= 0", CheckStage::level},
    CheckInfo{"w_dissipation", "Eq. (4)",
              "dW/dt = -2 int t(|Hess f - g/2t|^2 + Ric_{m,n}(L)(grad f, grad f)) u - "
              "(2/(m-n)) int t(grad phi.grad f + (m-n)/2t)^2 u",
              CheckStage::refinement},
    CheckInfo{"w_rigidity", "Thm 1.6", "W_m = 0 and dW_m/dt = 0 for the Euclidean Gaussian",
              CheckStage::level},
    CheckInfo{"law_vs_kernel", "Eq. (15)", "Law(X_T | X_0 = x) = p_T(x, y) dmu(y)",
              CheckStage::finest},
    CheckInfo{"supermartingale_h", "Thm 1.1",
              "h(X_s, T - s) = psi|grad u|^2/u - u log(A/u) is a submartingale in s",
              CheckStage::finest},
    CheckInfo{"bridge_energy_identity", "Eq. (21)",
              "E[J(T/2, X_{T/2})] - J(0, x) = E int_0^{T/2} |grad J|^2 dt", CheckStage::finest},
    CheckInfo{"gradient_energy_derivative", "Eq. (18)",
              "d/dt E|grad J|^2 = 2E(|Hess J|^2 + Ric(L)(grad J, grad J))", CheckStage::finest},
    CheckInfo{"harnack_via_bridge", "Eq. (19)",
              "|grad log p_T(x, y)|^2 <= 2(1/T + K) E log(p_{T/2}(X_{T/2}, y)/p_T(x, y))",
              CheckStage::finest},
    CheckInfo{"mu_rigidity", "Thm 1.7",
              "mu(tau) = 0 on Euclidean space, attained by the Gaussian of variance 2 tau",
              CheckStage::finest},
    CheckInfo{"lsi_check", "Eq. (39)",
              "int v^2 log v^2 <= 4 tau int |grad v|^2 - m(1 + log(4 pi tau)/2) - mu(tau)",
              CheckStage::finest},
    CheckInfo{"w_gradient", "W_m(v^2, tau)",
              "analytic gradient of W agrees with finite differences", CheckStage::finest},
    CheckInfo{"mu_lower_bound_scan", "Eq. (39)", "mu(tau) >= -(C + m + (m/2) log 4 pi)",
              CheckStage::finest},
};

}  // namespace

std::span<const CheckInfo> check_registry() { return kChecks; }

const CheckInfo* find_check(std::string_view name) {
  for (const auto& c : kChecks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace wlab
