"""
Linear Programs

Exact linear programming on pycddlib in fraction mode. A model is built
from free and non-negative variables and (in)equality rows, then handed
to cdd as an H-representation b + A x >= 0 with the equalities in the
linearity set. Every distance, gap, support value and dual norm on the
polyhedral path is one LinearProgram. Row duals, which feed separation and
subgradients, come from solving the explicit dual program the same way.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import cdd

from convlab.engine.errors import ConsistencyError

logger = logging.getLogger(__name__)

NUMBER_TYPE = "fraction"

Number = Union[int, Fraction]
LinExpr = Mapping[int, Number]


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class Sense(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "=="


_CDD_STATUS = {
    cdd.LPStatusType.OPTIMAL: LPStatus.OPTIMAL,
    cdd.LPStatusType.INCONSISTENT: LPStatus.INFEASIBLE,
    cdd.LPStatusType.STRUC_INCONSISTENT: LPStatus.INFEASIBLE,
    cdd.LPStatusType.DUAL_UNBOUNDED: LPStatus.INFEASIBLE,
    cdd.LPStatusType.DUAL_INCONSISTENT: LPStatus.UNBOUNDED,
    cdd.LPStatusType.STRUC_DUAL_INCONSISTENT: LPStatus.UNBOUNDED,
    cdd.LPStatusType.UNBOUNDED: LPStatus.UNBOUNDED,
}


@dataclass
class LPResult:
    """Outcome of a solve. Duals are d(optimal objective)/d(rhs) per row."""
    status: LPStatus
    objective: Optional[Fraction] = None
    values: Dict[int, Fraction] = field(default_factory=dict)
    duals: Dict[int, Fraction] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == LPStatus.OPTIMAL

    def value(self, var: int) -> Fraction:
        return self.values.get(var, Fraction(0))

    def dual(self, row: int) -> Fraction:
        return self.duals.get(row, Fraction(0))


@dataclass
class Row:
    coeffs: Dict[int, Fraction]
    sense: Sense
    rhs: Fraction


def _exact(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


class LinearProgram:
    """
    Small modelling layer over cdd.

    Variables are either free or non-negative. Rows are linear
    (in)equalities. Call minimize() or maximize() once, then solve().
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self._names: List[str] = []
        self._free: List[bool] = []
        self._rows: List[Row] = []
        self._objective: Dict[int, Fraction] = {}
        self._maximize = False
        self._constants: Dict[Fraction, int] = {}

    # ------------------------------------------------------------------
    # Model building
    # ------------------------------------------------------------------

    def free(self, name: str = "") -> int:
        return self._new_var(name, True)

    def nonneg(self, name: str = "") -> int:
        return self._new_var(name, False)

    def constant(self, value: Number) -> int:
        """A variable pinned to a fixed value, shared per value."""
        value = Fraction(value)
        var = self._constants.get(value)
        if var is None:
            var = self.free(f"const[{value}]")
            self.add({var: 1}, Sense.EQ, value)
            self._constants[value] = var
        return var

    def add(self, coeffs: LinExpr, sense: Union[Sense, str], rhs: Number = 0) -> int:
        """Add a row; returns its id for dual lookup."""
        cleaned: Dict[int, Fraction] = {}
        for var, coef in coeffs.items():
            if var < 0 or var >= len(self._names):
                raise ValueError(f"unknown variable {var} in {self.name}")
            coef = Fraction(coef)
            if coef != 0:
                cleaned[var] = cleaned.get(var, Fraction(0)) + coef
        self._rows.append(Row(cleaned, Sense(sense), Fraction(rhs)))
        return len(self._rows) - 1

    def minimize(self, coeffs: LinExpr) -> None:
        self._objective = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        self._maximize = False

    def maximize(self, coeffs: LinExpr) -> None:
        self._objective = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        self._maximize = True

    @property
    def num_vars(self) -> int:
        return len(self._names)

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> Tuple[Row, ...]:
        return tuple(self._rows)

    def is_free(self, var: int) -> bool:
        return self._free[var]

    def _new_var(self, name: str, free: bool) -> int:
        self._names.append(name or f"v{len(self._names)}")
        self._free.append(free)
        return len(self._names) - 1

    # ------------------------------------------------------------------
    # Solve
    # ------------------------------------------------------------------

    def _matrix(self) -> "cdd.Matrix":
        width = max(self.num_vars, 1)
        zero = Fraction(0)

        def cells(coeffs: Mapping[int, Fraction], constant: Fraction, sign: int) -> List[Fraction]:
            line = [constant] + [zero] * width
            for var, coef in coeffs.items():
                line[var + 1] = sign * coef
            return line

        # 1 >= 0 keeps the matrix non-empty for unconstrained models
        inequalities = [[Fraction(1)] + [zero] * width]
        equalities = []
        for row in self._rows:
            if row.sense == Sense.LE:
                inequalities.append(cells(row.coeffs, row.rhs, -1))
            elif row.sense == Sense.GE:
                inequalities.append(cells(row.coeffs, -row.rhs, 1))
            else:
                equalities.append(cells(row.coeffs, row.rhs, -1))
        for var, is_free in enumerate(self._free):
            if not is_free:
                inequalities.append(cells({var: Fraction(1)}, zero, 1))

        mat = cdd.Matrix(inequalities, number_type=NUMBER_TYPE)
        if equalities:
            mat.extend(equalities, linear=True)
        mat.rep_type = cdd.RepType.INEQUALITY
        objective = [zero] * (width + 1)
        for var, coef in self._objective.items():
            objective[var + 1] = coef
        mat.obj_type = cdd.LPObjType.MAX if self._maximize else cdd.LPObjType.MIN
        mat.obj_func = tuple(objective)
        return mat

    def solve(self, with_duals: bool = False) -> LPResult:
        lp = cdd.LinProg(self._matrix())
        lp.solve()
        status = _CDD_STATUS.get(lp.status)
        if status is None:
            raise ConsistencyError(f"{self.name}: cdd left the program undecided")
        if status != LPStatus.OPTIMAL:
            logger.debug("%s %s (%d rows, %d vars)", self.name, status.value,
                         self.num_rows, self.num_vars)
            return LPResult(status)

        solution = lp.primal_solution
        values = {var: _exact(solution[var]) for var in range(self.num_vars)
                  if _exact(solution[var]) != 0}
        objective = sum((coef * values.get(var, Fraction(0)) for var, coef in self._objective.items()),
                        Fraction(0))
        duals = self._duals(objective) if with_duals else {}
        logger.debug("%s optimal: %d rows, %d vars", self.name, self.num_rows, self.num_vars)
        return LPResult(LPStatus.OPTIMAL, objective, values, duals)

    # ------------------------------------------------------------------
    # Duals
    # ------------------------------------------------------------------

    def _duals(self, objective: Fraction) -> Dict[int, Fraction]:
        """
        Sensitivities y_r of an optimal objective to each row's rhs.

        For min c.x the dual is max b.y with y_r >= 0 on >= rows, y_r <= 0
        on <= rows, y_r free on equalities, and A^T y = c on free columns,
        A^T y <= c on non-negative ones. A max program is the min of -c
        with the sensitivities negated.
        """
        sign = -1 if self._maximize else 1
        dual = LinearProgram(f"{self.name}:dual")
        yvars: List[Tuple[int, int]] = []  # (dual var, orientation) per row
        for row in self._rows:
            if row.sense == Sense.EQ:
                yvars.append((dual.free(), 1))
            elif row.sense == Sense.GE:
                yvars.append((dual.nonneg(), 1))
            else:
                yvars.append((dual.nonneg(), -1))

        columns: Dict[int, Dict[int, Fraction]] = {var: {} for var in range(self.num_vars)}
        for r, row in enumerate(self._rows):
            y, orientation = yvars[r]
            for var, coef in row.coeffs.items():
                columns[var][y] = orientation * coef
        for var, column in columns.items():
            cost = sign * self._objective.get(var, Fraction(0))
            if not column and cost == 0:
                continue
            dual.add(column, Sense.EQ if self._free[var] else Sense.LE, cost)
        dual.maximize({y: orientation * row.rhs for (y, orientation), row in zip(yvars, self._rows)})

        result = dual.solve()
        if not result.optimal:
            raise ConsistencyError(f"{self.name}: dual program is {result.status.value}")
        if result.objective != sign * objective:
            raise ConsistencyError(f"{self.name}: duality gap {sign * objective - result.objective}")
        duals = {}
        for r, (y, orientation) in enumerate(yvars):
            value = sign * orientation * result.value(y)
            if value != 0:
                duals[r] = value
        return duals


def constraint_arrays(lp: LinearProgram, size: Optional[int] = None
                      ) -> Tuple[List[List[float]], List[float], List[List[float]], List[float]]:
    """Float (A_eq, b_eq, A_ub, b_ub) of a model's rows with A_ub x <= b_ub."""
    size = lp.num_vars if size is None else size
    a_eq: List[List[float]] = []
    b_eq: List[float] = []
    a_ub: List[List[float]] = []
    b_ub: List[float] = []
    for row in lp.rows:
        line = [0.0] * size
        for var, coef in row.coeffs.items():
            line[var] = float(coef)
        if row.sense == Sense.EQ:
            a_eq.append(line)
            b_eq.append(float(row.rhs))
        elif row.sense == Sense.LE:
            a_ub.append(line)
            b_ub.append(float(row.rhs))
        else:
            a_ub.append([-v for v in line])
            b_ub.append(-float(row.rhs))
    return a_eq, b_eq, a_ub, b_ub


def variable_bounds(lp: LinearProgram, size: Optional[int] = None) -> Sequence[Tuple[Optional[float], None]]:
    size = lp.num_vars if size is None else size
    return [(None if lp.is_free(var) else 0.0, None) for var in range(size)]
