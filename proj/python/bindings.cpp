#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "polyens/ensembles.hpp"
#include "polyens/errors.hpp"
#include "polyens/kernels.hpp"
#include "polyens/meijer.hpp"
#include "polyens/rmt_sim.hpp"
#include "polyens/specfun.hpp"
#include "polyens/verify.hpp"

namespace py = pybind11;
using namespace polyens;

namespace {

TruncationModelParams truncation(int n, const std::vector<int>& nu, int l) {
    TruncationModelParams p;
    p.n = n;
    p.M = static_cast<int>(nu.size());
    p.nu = nu;
    p.l = l;
    p.validate();
    return p;
}

py::dict kernel_dict(const KernelValue& v) {
    py::dict d;
    d["value"] = v.value;
    d["abs_imag_residual"] = v.abs_imag_residual;
    d["est_error"] = v.est_error;
    d["route"] = to_string(v.route);
    d["converged"] = v.converged;
    return d;
}

MatrixChainSpec chain(const std::string& model, int n, const std::vector<int>& nu, const std::vector<int>& tilde_nu,
                      int l) {
    if (model == "ginibre") return MatrixChainSpec::ginibre_chain(n, nu);
    if (model == "inverse") return MatrixChainSpec::inverse_chain(n, nu, tilde_nu);
    if (model == "truncation") return MatrixChainSpec::truncated_chain(truncation(n, nu, l));
    throw DomainError("unknown model '" + model + "' (ginibre, inverse, truncation)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Polynomial ensembles of products of random matrices";
    m.attr("__version__") = POLYENS_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<PoleError>(m, "PoleError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<SpecError>(m, "SpecError", base.ptr());
    py::register_exception<StripError>(m, "StripError", base.ptr());
    py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
    py::register_exception<TruncationError>(m, "TruncationError", base.ptr());
    py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
    py::register_exception<RouteDisagreementError>(m, "RouteDisagreementError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<SingularFactorError>(m, "SingularFactorError", base.ptr());

    m.def("log_gamma", [](std::complex<double> z) { return log_gamma(z); }, py::arg("z"));
    m.def("rgamma", &rgamma, py::arg("x"), "1 / Gamma(x), zero at the poles");
    m.def(
        "wright_bessel",
        [](double a, double b, double x) {
            WrightParams p;
            p.a = a;
            p.b = b;
            return wright_bessel(p, x);
        },
        py::arg("a"), py::arg("b"), py::arg("x"), "sum_j (-x)^j / (j! Gamma(a + j b))");

    m.def(
        "meijer_g",
        [](int mm, int nn, std::vector<double> a, std::vector<double> b, double x) {
            return meijer_g(MeijerGSpec::make(mm, nn, std::move(a), std::move(b)), x);
        },
        py::arg("m"), py::arg("n"), py::arg("a"), py::arg("b"), py::arg("x"), "G^{m,n}_{p,q}(a; b | x)");

    m.def(
        "pk", [](int n, const std::vector<int>& nu, int l, int k, double x) { return pk(truncation(n, nu, l), k, x); },
        py::arg("n"), py::arg("nu"), py::arg("l"), py::arg("k"), py::arg("x"));
    m.def(
        "qk", [](int n, const std::vector<int>& nu, int l, int k, double y) { return qk(truncation(n, nu, l), k, y); },
        py::arg("n"), py::arg("nu"), py::arg("l"), py::arg("k"), py::arg("y"));
    m.def(
        "kernel_finite",
        [](int n, const std::vector<int>& nu, int l, double x, double y, const std::string& route) {
            return kernel_dict(kernel_finite(truncation(n, nu, l), x, y, kernel_route_from_string(route)));
        },
        py::arg("n"), py::arg("nu"), py::arg("l"), py::arg("x"), py::arg("y"), py::arg("route") = "contour");
    m.def(
        "kernel_hard_edge",
        [](std::vector<double> nu, double x, double y, const std::string& route) {
            HardEdgeParams p;
            p.nu = std::move(nu);
            p.validate();
            return kernel_dict(kernel_hard_edge(p, x, y, kernel_route_from_string(route)));
        },
        py::arg("nu"), py::arg("x"), py::arg("y"), py::arg("route") = "contour");
    m.def(
        "kernel_borodin",
        [](double alpha, double theta, double x, double y) {
            BorodinParams p;
            p.alpha = alpha;
            p.theta = theta;
            p.validate();
            return kernel_borodin(p, x, y);
        },
        py::arg("alpha"), py::arg("theta"), py::arg("x"), py::arg("y"));

    m.def(
        "sample_chain",
        [](const std::string& model, int n, const std::vector<int>& nu, std::uint64_t seed, int count,
           const std::vector<int>& tilde_nu, int l, int threads) {
            const MatrixChainSpec spec = chain(model, n, nu, tilde_nu, l);
            SampleBatch batch;
            {
                py::gil_scoped_release release;
                batch = sample_chain(spec, seed, count, threads);
            }
            py::array_t<double> out({static_cast<py::ssize_t>(batch.samples.size()), static_cast<py::ssize_t>(n)});
            auto view = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < batch.samples.size(); ++i)
                for (int j = 0; j < n; ++j) view(i, j) = batch.samples[i][j];
            return py::make_tuple(out, batch.rejections);
        },
        py::arg("model"), py::arg("n"), py::arg("nu"), py::arg("seed"), py::arg("count"),
        py::arg("tilde_nu") = std::vector<int>{}, py::arg("l") = 0, py::arg("threads") = 0,
        "Squared singular values, one row per draw in descending order, and the rejection count.");

    m.def("verify_suite_names", &verify_suite_names);
    m.def(
        "run_verify_suite",
        [](const std::string& suite, int n, int samples, std::uint64_t seed) {
            VerifyOptions o;
            o.n = n;
            o.samples = samples;
            o.seed = seed;
            VerifyReport r;
            {
                py::gil_scoped_release release;
                r = run_verify_suite(suite, o);
            }
            py::list cases;
            for (const auto& c : r.cases) {
                py::dict d;
                d["name"] = c.name;
                d["metric"] = c.metric;
                d["threshold"] = c.threshold;
                d["pass"] = c.pass;
                cases.append(d);
            }
            py::dict d;
            d["suite"] = r.suite;
            d["metric_name"] = r.metric_name;
            d["max_metric"] = r.max_metric;
            d["cases"] = cases;
            d["pass"] = r.pass;
            return d;
        },
        py::arg("suite"), py::arg("n") = 0, py::arg("samples") = 100000, py::arg("seed") = 20140617);
}
