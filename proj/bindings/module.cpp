#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "minkqm/bohm.hpp"
#include "minkqm/grwf.hpp"
#include "minkqm/scenarios.hpp"

namespace py = pybind11;
using namespace minkqm;

namespace {

const char* causal_name(spacetime::CausalClass c) {
    switch (c) {
        case spacetime::CausalClass::spacelike: return "spacelike";
        case spacetime::CausalClass::timelike: return "timelike";
        case spacetime::CausalClass::lightlike: return "lightlike";
    }
    return "?";
}

std::vector<std::complex<double>> vec_to_std(const hilbert::Vec& v) {
    return {v.data(), v.data() + v.size()};
}

std::vector<std::vector<std::complex<double>>> mat_to_std(const hilbert::Mat& m) {
    std::vector<std::vector<std::complex<double>>> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out[r].push_back(m(r, c));
    return out;
}

probe::Axis parse_axis(const std::string& a) {
    if (a == "x") return probe::Axis::x;
    if (a == "y") return probe::Axis::y;
    if (a == "z") return probe::Axis::z;
    throw ValidationError("axis must be x, y or z");
}

hilbert::Ket parse_initial(const std::string& name) {
    if (name == "singlet") return hilbert::singlet();
    if (name == "up_down") return hilbert::basis_ket({2, 2}, 1);
    if (name == "down_up") return hilbert::basis_ket({2, 2}, 2);
    if (name == "up_up") return hilbert::basis_ket({2, 2}, 0);
    if (name == "down_down") return hilbert::basis_ket({2, 2}, 3);
    throw ValidationError("unknown initial state '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Collapse schemes, nonlocal measurements and primitive-ontology "
              "dynamics on Minkowski space-time";

    py::class_<spacetime::Event>(m, "Event")
        .def(py::init<double, double, double, double>(), py::arg("t") = 0.0, py::arg("x") = 0.0,
             py::arg("y") = 0.0, py::arg("z") = 0.0)
        .def_readwrite("t", &spacetime::Event::t)
        .def_readwrite("x", &spacetime::Event::x)
        .def_readwrite("y", &spacetime::Event::y)
        .def_readwrite("z", &spacetime::Event::z)
        .def("__repr__", [](const spacetime::Event& e) {
            return "Event(t=" + std::to_string(e.t) + ", x=" + std::to_string(e.x) +
                   ", y=" + std::to_string(e.y) + ", z=" + std::to_string(e.z) + ")";
        });

    m.def("interval", &spacetime::interval, "Minkowski interval (a-b).(a-b), signature (+,-,-,-)");
    m.def("classify",
          [](const spacetime::Event& a, const spacetime::Event& b) {
              return std::string(causal_name(spacetime::classify(a, b)));
          });
    m.def("in_future", &spacetime::in_future);
    m.def("boost", &spacetime::boost, py::arg("event"), py::arg("rapidity"),
          py::arg("axis") = std::array<double, 3>{1.0, 0.0, 0.0});

    m.def("pauli",
          [](const std::array<double, 3>& u) { return mat_to_std(hilbert::pauli(u).mat); },
          "u.sigma as a 2x2 complex matrix");
    m.def("singlet", [] { return vec_to_std(hilbert::singlet().amps); });
    m.def("eigenvalues",
          [](const std::vector<std::vector<std::complex<double>>>& rows) {
              const auto n = static_cast<Eigen::Index>(rows.size());
              hilbert::Mat mat(n, n);
              for (Eigen::Index r = 0; r < n; ++r)
                  for (Eigen::Index c = 0; c < n; ++c)
                      mat(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
              std::vector<double> out;
              for (const auto& space : hilbert::spectral({{n}, mat}).spaces)
                  out.push_back(space.eigenvalue);
              return out;
          },
          "grouped eigenvalues of a hermitian matrix");

    m.def("eprb_correlation", &scenarios::eprb_correlation, py::arg("a"), py::arg("b"),
          "singlet correlation E(a,b) for unit vectors a, b");
    m.def("chsh", &scenarios::chsh, py::arg("a"), py::arg("a2"), py::arg("b"), py::arg("b2"));

    m.def("sigma_tot_sq_demo", [] {
        const auto rep = measurement::sigma_tot_sq_demo();
        py::dict out;
        out["p_noflip"] = rep.p_noflip;
        out["p_flip"] = rep.p_flip;
        return out;
    });

    m.def("no_signaling_deviation", [](const std::array<double, 3>& obs_axis, double coupling) {
        using measurement::MeasureStep;
        using measurement::UnitaryStep;
        const auto obs = hilbert::embed(hilbert::pauli(obs_axis), 0, {2, 2});
        const auto far = hilbert::embed({{2}, hilbert::sigma_z()}, 1, {2, 2});
        const measurement::QState singlet = measurement::QState::from_ket(hilbert::singlet());
        return measurement::no_signaling_audit(singlet, obs,
                                               {{MeasureStep{far}}, {UnitaryStep{far, coupling}}});
    });

    m.def(
        "aa_simultaneous",
        [](const std::string& initial, std::uint64_t seed, double strength) {
            const auto res = scenarios::aa_simultaneous(parse_initial(initial), seed, strength);
            py::dict out;
            out["sums"] = res.sums;
            out["fidelity_to_initial"] = res.fidelity_to_initial;
            return out;
        },
        py::arg("initial") = "singlet", py::arg("seed") = 0, py::arg("strength") = 1.0);
    m.def(
        "aa_verification_probability",
        [](const std::string& initial, double strength) {
            return scenarios::aa_verification_probability(parse_initial(initial), strength);
        },
        py::arg("initial") = "singlet", py::arg("strength") = 1.0);
    m.def(
        "aa_time_displaced",
        [](std::uint64_t seed, double strength) {
            const auto res = scenarios::aa_time_displaced(seed, strength);
            py::dict out;
            out["pi1"] = res.pi1;
            out["pi2"] = res.pi2;
            out["sum"] = res.sum;
            out["intermediate_branches"] = res.intermediate_branches;
            out["fidelity_to_singlet"] = res.fidelity_to_singlet;
            return out;
        },
        py::arg("seed") = 0, py::arg("strength") = 1.0);
    m.def(
        "aa_under_foliation",
        [](const std::string& axis, std::uint64_t seed, double sz2) {
            const auto res = scenarios::aa_under_foliation(parse_axis(axis), seed, sz2);
            py::dict out;
            out["sum"] = res.sum;
            out["p_sz1_plus"] = res.p_sz1_plus;
            out["fidelity_to_conditioned_product"] = res.fidelity_to_up_down;
            return out;
        },
        py::arg("axis") = "z", py::arg("seed") = 0, py::arg("sz2") = -1.0);
    m.def(
        "monitoring_conflict",
        [](const std::string& layout) {
            scenarios::MonitorLayout l = scenarios::MonitorLayout::interleaved;
            if (layout == "no_primed") l = scenarios::MonitorLayout::no_primed;
            else if (layout == "primed_first") l = scenarios::MonitorLayout::primed_first;
            else if (layout != "interleaved") throw ValidationError("unknown layout");
            return scenarios::monitoring_conflict(l).p_all_zero;
        },
        py::arg("layout") = "interleaved");
    m.def("hk_refutation", [] {
        const auto res = scenarios::hk_refutation();
        py::dict out;
        out["p_verify_backward_cone"] = res.p_verify_hk;
        out["p_verify_surface_schemes"] = res.p_verify_schemes;
        out["probability_gap"] = res.mass;
        out["wing_state"] = vec_to_std(res.hk_wing_state.amps);
        return out;
    });
    m.def("reduced_density_demo", [] {
        const auto res = scenarios::reduced_density_demo();
        py::dict out;
        out["before"] = mat_to_std(res.rho_sigma_red);
        out["after"] = mat_to_std(res.rho_xi_red);
        return out;
    });
    m.def("run_scenario_json",
          [](const std::string& text, std::uint64_t seed) {
              const auto s = scenarios::load_scenario(text);
              scenarios::validate(s);
              return scenarios::transcript_json(scenarios::run(s, seed));
          },
          py::arg("json_text"), py::arg("seed") = 0);

    py::class_<grwf::GrwParams>(m, "GrwParams")
        .def(py::init<double, double>(), py::arg("rate") = 0.5, py::arg("width") = 1.5)
        .def_readwrite("rate", &grwf::GrwParams::lambda)
        .def_readwrite("width", &grwf::GrwParams::alpha);

    m.def(
        "grw_hit_density",
        [](const std::vector<std::complex<double>>& amps, int particles, int sites, int particle,
           const grwf::GrwParams& p) {
            grwf::LatticeWave w;
            w.particles = particles;
            w.sites = sites;
            w.amps = Eigen::Map<const Eigen::VectorXcd>(amps.data(),
                                                        static_cast<Eigen::Index>(amps.size()));
            return grwf::hit_density(w, particle, p);
        },
        py::arg("amplitudes"), py::arg("particles"), py::arg("sites"), py::arg("particle") = 0,
        py::arg("params") = grwf::GrwParams{});
    m.def(
        "grw_sample_flashes",
        [](int particles, int sites, double horizon, const grwf::GrwParams& p,
           std::uint64_t seed) {
            Rng rng(seed);
            const auto flashes =
                grwf::sample_flashes(grwf::LatticeWave::uniform(particles, sites), horizon, p, rng);
            std::vector<std::tuple<int, double, int>> out;
            for (const auto& f : flashes) out.emplace_back(f.particle, f.time, f.site);
            return out;
        },
        py::arg("particles") = 1, py::arg("sites") = 6, py::arg("horizon") = 20.0,
        py::arg("params") = grwf::GrwParams{}, py::arg("seed") = 0);
    m.def(
        "rgrwf_density",
        [](const spacetime::Event& seed, const std::vector<spacetime::Event>& flashes,
           double mean_chi, double sigma_chi, const grwf::GrwParams& p) {
            return grwf::rgrwf_density(seed, flashes, {mean_chi, sigma_chi}, p);
        },
        py::arg("seed_flash"), py::arg("flashes"), py::arg("mean_chi") = 0.0,
        py::arg("sigma_chi") = 0.8, py::arg("params") = grwf::GrwParams{0.5, 0.4});

    m.def(
        "bohm_velocity",
        [](double center, double momentum, double width, double mass, double x, double t) {
            return bohm::velocity(bohm::GaussianPacket{center, momentum, width, mass}, x, t);
        },
        py::arg("center"), py::arg("momentum"), py::arg("width"), py::arg("mass"), py::arg("x"),
        py::arg("t"));
    m.def(
        "bohm_trajectory",
        [](double center, double momentum, double width, double mass, double q0, double t0,
           double t1) {
            const auto res =
                bohm::integrate(bohm::GaussianPacket{center, momentum, width, mass}, q0, t0, t1);
            return res.trajectory.samples;
        },
        py::arg("center"), py::arg("momentum"), py::arg("width"), py::arg("mass"), py::arg("q0"),
        py::arg("t0") = 0.0, py::arg("t1") = 1.0);
    m.def(
        "equivariance_p_value",
        [](int n, double t1, std::uint64_t seed) {
            return bohm::equivariance_test(bohm::GaussianPacket{0.0, 0.5, 0.8, 1.0}, n, 0.0, t1,
                                           seed)
                .p_value;
        },
        py::arg("samples") = 2000, py::arg("t1") = 1.0, py::arg("seed") = 0);
    m.def(
        "bohm_dirac_velocity",
        [](const std::vector<std::pair<double, std::complex<double>>>& modes, double mass,
           double x, double t) {
            bohm::DiracPacket psi;
            psi.mass = mass;
            for (const auto& [p, amp] : modes) psi.modes.push_back({p, amp});
            return bohm::bohm_dirac_velocity(psi, x, t);
        },
        py::arg("modes"), py::arg("mass"), py::arg("x"), py::arg("t"));
    m.def(
        "struyve_frame",
        [](const std::vector<std::pair<double, std::complex<double>>>& modes, double mass) {
            bohm::DiracPacket psi;
            psi.mass = mass;
            for (const auto& [p, amp] : modes) psi.modes.push_back({p, amp});
            return bohm::struyve_frame({psi});
        },
        py::arg("modes"), py::arg("mass") = 1.0);

    py::register_exception<Error>(m, "MinkqmError");
}
