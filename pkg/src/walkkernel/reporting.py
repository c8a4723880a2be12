"""Side-by-side comparison of the kernel-method solution with enumeration."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .models import ModelSpec, model_spec
from .pipeline import solve_model
from .series import PuiseuxSeries
from .walks import boundary_series, enumerate_walks
from .xypoly import TriPoly


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    orders: tuple  # (lowest, highest) t-exponent compared
    mismatch: object  # None, or (t_exp, monomial, solver value, oracle value)
    solver_head: tuple = ()  # leading coefficients, scalar series only
    oracle_head: tuple = ()


@dataclass
class VerifyReport:
    model: str
    weights: tuple
    order: int
    rows: list
    equation_set: tuple
    determinants: dict
    runtime: float = field(default=0.0, compare=False)

    @property
    def passed(self):
        return all(r.mismatch is None for r in self.rows)

    def info(self):
        """JSON-ready content; runtime is left out so reports are reproducible."""
        return {
            "model": self.model,
            "weights": list(self.weights),
            "order": self.order,
            "status": "pass" if self.passed else "fail",
            "rows": [
                {
                    "quantity": r.quantity,
                    "orders_checked": f"{r.orders[0]}..{r.orders[1]}",
                    "first_mismatch": "none" if r.mismatch is None else list(r.mismatch),
                    **({"solver": list(r.solver_head), "oracle": list(r.oracle_head)} if r.solver_head else {}),
                }
                for r in self.rows
            ],
            "equation_set": list(self.equation_set),
            "determinants": self.determinants,
        }

    def summary(self):
        lines = [f"{self.model} at (a,b,c)={tuple(str(w) for w in self.weights)} through t^{self.order}"]
        for r in self.rows:
            state = "ok" if r.mismatch is None else f"MISMATCH at {r.mismatch}"
            lines.append(f"  {r.quantity:10s} t^{r.orders[0]}..t^{r.orders[1]}  {state}")
        lines.append(f"  equation set {self.equation_set}  ({self.runtime:.1f} s)")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def _coefficients(s, order):
    """{(t_exp, monomial): coeff} through t^order."""
    if isinstance(s, TriPoly):
        return {(n, (i, j)): c for (n, i, j), c in s.terms.items() if n <= order}
    return {(texp, e): c for texp, e, c in s.terms() if texp <= order}


def compare(quantity, solver, oracle, order) -> ReportRow:
    a = _coefficients(solver, order)
    b = _coefficients(oracle, order)
    mismatch = None
    for key in sorted(set(a) | set(b), key=lambda k: (k[0], str(k[1]))):
        if a.get(key, 0) != b.get(key, 0):
            mismatch = (key[0], key[1], a.get(key, 0), b.get(key, 0))
            break
    if quantity == "Q(0,0)" or quantity.startswith("Q_"):
        return ReportRow(
            quantity, (0, order), mismatch, tuple(_scalar_list(solver, order)), tuple(_scalar_list(oracle, order))
        )
    return ReportRow(quantity, (0, order), mismatch)


def _scalar_list(s: PuiseuxSeries, order):
    return [s.coeffs.get(n * s.ram, {}).get(0, 0) for n in range(order + 1)]


def verify(name, weights=(1, 1, 1), order=15, working=None) -> VerifyReport:
    start = time.perf_counter()
    spec = name if isinstance(name, ModelSpec) else model_spec(name, *weights)
    sol = solve_model(spec, order=order, working=working)
    table = enumerate_walks(spec, order)
    rows = []
    for tag, value in sorted(sol.scalars.items(), key=lambda kv: (kv[0].i + kv[0].j > 0, kv[0].j, kv[0].i)):
        rows.append(compare(str(tag), value, boundary_series(table, ("point", tag.i, tag.j)), order))
    rows.append(compare("Q(x,0)", sol.qx0, boundary_series(table, ("line_y", 0)), order))
    rows.append(compare("Q(0,y)", sol.q0y, boundary_series(table, ("line_x", 0)), order))
    rows.append(compare("Q^d_0", sol.qd0, boundary_series(table, ("diag", 0)), order))
    rows.append(compare("Q(x,y)", sol.full, boundary_series(table, ("full",)), order))
    d = sol.diagnostics
    dets = {"chosen": d.get("determinant"), "tried": d.get("tried", [])}
    for key in ("pre_injection_determinant", "determinant_table"):
        if key in d:
            dets[key] = d[key]
    report = VerifyReport(spec.name, spec.weights, order, rows, tuple(d.get("equation_set", ())), dets)
    report.runtime = time.perf_counter() - start
    return report
