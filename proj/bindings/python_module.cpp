// pybind11 surface over the core operations: graph construction, composition
// and forward score, the three losses, label graph builders, the penalty
// schedule, greedy decoding and edit distance.

#include <optional>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stc/alphabet.h"
#include "stc/autograd.h"
#include "stc/compose.h"
#include "stc/emission.h"
#include "stc/graph.h"
#include "stc/io.h"
#include "stc/label_graphs.h"
#include "stc/losses.h"
#include "stc/model.h"
#include "stc/shortest.h"

namespace py = pybind11;
using namespace stc;

namespace {

Matrix toMatrix(const py::array_t<double, py::array::c_style |
                                              py::array::forcecast>& a) {
  if (a.ndim() != 2) {
    throw std::invalid_argument("expected a 2-D array");
  }
  Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

py::array_t<double> fromMatrix(const Matrix& m) {
  py::array_t<double> a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

py::tuple lossTuple(const LossResult& r) {
  return py::make_tuple(r.loss, fromMatrix(r.grad));
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Differentiable WFST losses (CTC / selfless-CTC / STC) in the "
            "log semiring";

  py::class_<Graph>(m, "Graph")
      .def(py::init<bool>(), py::arg("grad_enabled") = false)
      .def("add_node", &Graph::addNode, py::arg("start") = false,
           py::arg("final") = false)
      .def(
          "add_arc",
          [](Graph& g, int src, int dst, int ilabel, int olabel, double w) {
            // olabel omitted: acceptor arc
            return g.addArc(src, dst, ilabel, olabel == -2 ? ilabel : olabel,
                            w);
          },
          py::arg("src"), py::arg("dst"), py::arg("ilabel"),
          py::arg("olabel") = -2, py::arg("weight") = 0.0)
      .def_property_readonly("num_states", &Graph::numStates)
      .def_property_readonly("num_arcs", &Graph::numArcs)
      .def("weight", &Graph::weight, py::arg("arc"))
      .def("set_weight", &Graph::setWeight, py::arg("arc"), py::arg("weight"))
      .def("is_start", &Graph::isStart)
      .def("is_final", &Graph::isFinal)
      .def("__repr__", [](const Graph& g) {
        return "<Graph states=" + std::to_string(g.numStates()) +
               " arcs=" + std::to_string(g.numArcs()) + ">";
      });

  m.def(
      "compose",
      [](const Graph& a, const Graph& b) { return compose(a, b).graph; },
      py::arg("g1"), py::arg("g2"),
      "Relational composition; epsilon paths are never double counted.");
  m.def("forward_score", &forwardScore, py::arg("graph"),
        "Log-sum-exp over all accepting path weights.");
  m.def("export_text", &exportText, py::arg("graph"));
  m.def(
      "export_dot",
      [](const Graph& g) { return exportDot(g); }, py::arg("graph"));
  m.def("parse_text", py::overload_cast<const std::string&>(&parseText),
        py::arg("text"));

  m.def(
      "ctc_loss",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             logProbs,
         const std::vector<int>& target) {
        return lossTuple(ctcLoss(toMatrix(logProbs), target));
      },
      py::arg("log_probs"), py::arg("target"),
      "Returns (loss, gradient); columns are tokens then blank.");
  m.def(
      "selfless_ctc_loss",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             logProbs,
         const std::vector<int>& target) {
        return lossTuple(selflessCtcLoss(toMatrix(logProbs), target));
      },
      py::arg("log_probs"), py::arg("target"));
  m.def(
      "stc_loss",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             logProbs,
         const std::vector<int>& partial, double lam, bool reduced) {
        return lossTuple(stcLoss(toMatrix(logProbs), partial, lam, reduced));
      },
      py::arg("log_probs"), py::arg("partial"), py::arg("lambda_") = 0.0,
      py::arg("reduced_alphabet") = false,
      "Partial-label loss; lambda <= 0 (or -inf) is the per-token insertion "
      "penalty.");

  m.def(
      "build_emission",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             logProbs,
         std::optional<std::vector<int>> tokens,
         std::optional<std::vector<int>> starComplements) {
        // the matrix only needs to outlive construction here: the returned
        // graph carries the weights on its arcs
        Matrix m2 = toMatrix(logProbs);
        Alphabet alphabet(m2.cols() - 1);
        EmissionGraph e =
            buildEmission(m2, alphabet, tokens ? &*tokens : nullptr);
        if (starComplements) {
          e = augmentStars(e, *starComplements);
        }
        return e.graph;
      },
      py::arg("log_probs"), py::arg("tokens") = py::none(),
      py::arg("star_complements") = py::none(),
      "Linear-chain emission graph; `tokens` restricts the arcs "
      "(reduced-alphabet mode), `star_complements` adds the star arc and "
      "one complement arc per listed token.");
  m.def(
      "build_ctc_label",
      [](int vocab, const std::vector<int>& y) {
        return buildCtcLabel(Alphabet(vocab), y).graph;
      },
      py::arg("vocab_size"), py::arg("target"));
  m.def(
      "build_selfless_ctc_label",
      [](int vocab, const std::vector<int>& y) {
        return buildSelflessCtcLabel(Alphabet(vocab), y).graph;
      },
      py::arg("vocab_size"), py::arg("target"));
  m.def(
      "build_stc_label",
      [](int vocab, const std::vector<int>& y, double lam) {
        return buildStcLabel(Alphabet(vocab), y, lam).graph;
      },
      py::arg("vocab_size"), py::arg("partial"), py::arg("lambda_"));

  py::class_<PenaltySchedule>(m, "PenaltySchedule")
      .def(py::init<double, double, double>(), py::arg("p0"), py::arg("p_max"),
           py::arg("tau"))
      .def_static("from_half_life", &PenaltySchedule::fromHalfLife,
                  py::arg("p0"), py::arg("p_max"), py::arg("half_life"))
      .def("p_at", &PenaltySchedule::pAt, py::arg("step"))
      .def("lambda_at", &PenaltySchedule::lambdaAt, py::arg("step"))
      .def_property_readonly("half_life", &PenaltySchedule::halfLife);

  m.def(
      "greedy_decode",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             logProbs,
         const std::string& mode) {
        CollapseMode m2 = mode == "stc" ? CollapseMode::Stc : CollapseMode::Ctc;
        return greedyDecode(toMatrix(logProbs), m2);
      },
      py::arg("log_probs"), py::arg("mode") = "ctc",
      "Per-frame argmax followed by the chosen collapse "
      "('ctc': merge repeats then drop blanks, 'stc': drop blanks only).");
  m.def("edit_distance_rate", &editDistanceRate, py::arg("hyp"),
        py::arg("ref"));

  m.attr("EPSILON") = kEpsilon;
  m.attr("NEG_INF") = kNegInf;
}
