#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rydgate/atom_model.hpp"
#include "rydgate/commands.hpp"
#include "rydgate/config.hpp"
#include "rydgate/dynamics.hpp"
#include "rydgate/metrics.hpp"
#include "rydgate/pulse_design.hpp"

namespace py = pybind11;
using namespace rydgate;

namespace {

py::dict design_pulse(double eta, double duration, double theta_g,
                      std::size_t n_samples) {
    const InvariantTrajectory traj =
        design_trajectory(duration, eta, theta_g, 1.0, n_samples);
    const PulseSchedule pulse = control_fields(traj);
    py::dict out;
    out["t"] = pulse.t;
    out["omega_x"] = pulse.omega_x;
    out["omega_y"] = pulse.omega_y;
    out["mu1"] = pulse.mu1;
    out["mu2"] = pulse.mu2;
    out["omega_max"] = pulse.omega_max;
    return out;
}

py::dict simulate_gate(const std::string& gate, double eta, double epsilon,
                       double forster_defect_T, double gamma_T, double rtol) {
    ScenarioConfig cfg;
    cfg.gate = gate;
    cfg.eta = eta;
    cfg.epsilon = epsilon;
    cfg.deltaT = forster_defect_T;
    cfg.gammaT = gamma_T;
    cfg.rtol = rtol;
    if (gate == "cz") {
        cfg.v_a = kPi / 2.0;
        cfg.v_b = kPi;
    } else if (gate != "cnot") {
        throw std::invalid_argument("simulate_gate: gate must be cnot or cz");
    }
    py::dict out;
    if (gamma_T > 0.0) {
        const InvariantTrajectory traj = cfg.trajectory();
        const ModelParams params = cfg.model_params();
        const Vector psi0 = cfg.initial_ket();
        const auto h = make_hamiltonian_source(params, make_field(traj));
        const auto trace = propagate_lindblad(
            h, lindblad_operators(params.gamma), Matrix(psi0 * psi0.adjoint()),
            0.0, 1.0, std::vector<double>{1.0}, cfg.propagation());
        Eigen::Vector4cd amp = Eigen::Vector4cd::Zero();
        for (int i = 0; i < 4; ++i) amp(i) = computational_ket(i).dot(psi0);
        const Eigen::Vector4cd image = cfg.target() * amp;
        Vector target_state = Vector::Zero(kPairDim);
        for (int i = 0; i < 4; ++i) {
            target_state += image(i) * computational_ket(i);
        }
        out["fidelity"] = state_fidelity(trace.final(), target_state);
        out["metric"] = "state";
    } else {
        out["fidelity"] = closed_system_gate_fidelity(cfg);
        out["metric"] = "average-gate";
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(rydgate, m) {
    m.doc() =
        "Invariant-based pulse design and two-atom Rydberg gate simulation";

    m.def("design_pulse", &design_pulse, py::arg("eta") = 1.0,
          py::arg("duration") = 1.0, py::arg("theta_g") = kPi,
          py::arg("n_samples") = 8193,
          "Reverse-engineered control fields for the holonomic gate family");

    m.def(
        "sensitivity_qs",
        [](double eta) {
            const SensitivityResult r = sensitivity_qs(eta);
            return py::make_tuple(r.closed_form, r.quadrature);
        },
        py::arg("eta"),
        "Systematic error sensitivity: (closed form, numerical quadrature)");

    // Dynamic matrices at the boundary; fixed-size Eigen types do not
    // convert safely through the caster on all platforms.
    m.def(
        "target_gate",
        [](double v_a, double v_b) {
            return Matrix(target_gate_matrix(v_a, v_b));
        },
        py::arg("v_a"), py::arg("v_b"),
        "Two-qubit holonomic gate family on (|00>,|01>,|10>,|11>)");
    m.def("cnot_gate", [] { return Matrix(cnot_gate()); });
    m.def("cz_gate", [] { return Matrix(cz_gate()); });

    m.def(
        "average_gate_fidelity",
        [](const Matrix& m_in) {
            if (m_in.rows() != 4 || m_in.cols() != 4) {
                throw std::invalid_argument(
                    "average_gate_fidelity expects a 4x4 matrix");
            }
            Eigen::Matrix4cd m4;
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) m4(i, j) = m_in(i, j);
            }
            return average_gate_fidelity(m4);
        },
        py::arg("m"));

    m.def("mu1_profile", &mu1_profile, py::arg("t"), py::arg("T"));
    m.def("mu2_profile", &mu2_profile, py::arg("t"), py::arg("T"),
          py::arg("eta"), py::arg("theta_g") = kPi);

    m.def(
        "accumulated_phases",
        [](double eta, std::size_t n) {
            const PhaseTrace tr =
                accumulated_phases(design_trajectory(1.0, eta), n);
            py::dict out;
            out["t"] = tr.times;
            out["theta2"] = tr.theta2;
            out["Theta2"] = tr.Theta2;
            return out;
        },
        py::arg("eta") = 1.0, py::arg("n_points") = 16385,
        "Dynamic and geometric phase traces on the unit interval");

    m.def("simulate_gate", &simulate_gate, py::arg("gate") = "cnot",
          py::arg("eta") = 1.0, py::arg("epsilon") = 0.0,
          py::arg("forster_defect_T") = 0.0, py::arg("gamma_T") = 0.0,
          py::arg("rtol") = 1e-9,
          "Full-model simulation; returns the final fidelity");

    m.attr("__version__") = "0.1.0";
}
