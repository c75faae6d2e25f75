# tests/test_engine/test_linear_program.py
from fractions import Fraction

import pytest

from convlab.engine.linear_program import (LinearProgram, LPStatus, Sense, constraint_arrays,
                                           variable_bounds)


class TestLinearProgram:
    """Test exact linear programs over cdd"""

    def test_maximize_vertex(self):
        """Should land on the vertex (8/5, 6/5) with value 14/5"""
        lp = LinearProgram("box")
        x, y = lp.nonneg("x"), lp.nonneg("y")
        lp.add({x: 1, y: 2}, Sense.LE, 4)
        lp.add({x: 3, y: 1}, Sense.LE, 6)
        lp.maximize({x: 1, y: 1})
        result = lp.solve()

        assert result.optimal
        assert result.objective == Fraction(14, 5)
        assert result.value(x) == Fraction(8, 5)
        assert result.value(y) == Fraction(6, 5)

    def test_minimize_free_variable(self):
        """Should let free variables go negative"""
        lp = LinearProgram("free")
        x = lp.free("x")
        lp.add({x: 1}, Sense.GE, -3)
        lp.minimize({x: 1})
        result = lp.solve()

        assert result.optimal
        assert result.value(x) == -3

    def test_infeasible(self):
        """Should report x >= 1, x <= 0 as infeasible"""
        lp = LinearProgram("empty")
        x = lp.nonneg("x")
        lp.add({x: 1}, Sense.GE, 1)
        lp.add({x: 1}, "<=", 0)
        lp.minimize({x: 1})

        assert lp.solve().status == LPStatus.INFEASIBLE

    def test_unbounded(self):
        """Should report an unbounded objective"""
        lp = LinearProgram("ray")
        x = lp.free("x")
        lp.add({x: 1}, Sense.GE, 0)
        lp.maximize({x: 1})

        assert lp.solve().status == LPStatus.UNBOUNDED

    def test_equality_rows(self):
        """Should satisfy equality rows exactly"""
        lp = LinearProgram("eq")
        x, y = lp.free("x"), lp.free("y")
        lp.add({x: 1, y: 1}, Sense.EQ, Fraction(1, 3))
        lp.add({x: 1, y: -1}, Sense.EQ, 1)
        lp.minimize({})
        result = lp.solve()

        assert result.value(x) == Fraction(2, 3)
        assert result.value(y) == Fraction(-1, 3)

    def test_constant_shared(self):
        """Should reuse one pinned variable per constant value"""
        lp = LinearProgram("const")
        assert lp.constant(2) == lp.constant(Fraction(2))
        assert lp.num_vars == 1

    def test_unknown_variable(self):
        """Should reject rows over undeclared variables"""
        lp = LinearProgram("bad")
        with pytest.raises(ValueError):
            lp.add({3: 1}, Sense.LE, 0)

    def test_unconstrained_model(self):
        """Should solve a model with no rows"""
        lp = LinearProgram("bare")
        x = lp.nonneg("x")
        lp.minimize({x: 1})
        result = lp.solve()

        assert result.optimal
        assert result.objective == 0


class TestDuals:
    """Test row sensitivities"""

    def test_box_duals(self):
        """Should price x + 2y <= 4 at 2/5 and 3x + y <= 6 at 1/5"""
        lp = LinearProgram("box")
        x, y = lp.nonneg("x"), lp.nonneg("y")
        first = lp.add({x: 1, y: 2}, Sense.LE, 4)
        second = lp.add({x: 3, y: 1}, Sense.LE, 6)
        lp.maximize({x: 1, y: 1})
        result = lp.solve(with_duals=True)

        assert result.dual(first) == Fraction(2, 5)
        assert result.dual(second) == Fraction(1, 5)
        assert 4 * result.dual(first) + 6 * result.dual(second) == result.objective

    def test_lower_bound_dual(self):
        """Should price an active lower bound at 1 for min x"""
        lp = LinearProgram("free")
        x = lp.free("x")
        row = lp.add({x: 1}, Sense.GE, -3)
        lp.minimize({x: 1})

        assert lp.solve(with_duals=True).dual(row) == 1

    def test_duals_skipped_by_default(self):
        """Should only price rows on request"""
        lp = LinearProgram("free")
        x = lp.free("x")
        lp.add({x: 1}, Sense.GE, -3)
        lp.minimize({x: 1})

        assert lp.solve().duals == {}


class TestConstraintArrays:
    """Test the float export of a model"""

    def test_rows_split_by_sense(self):
        """Should flip >= rows into A_ub x <= b_ub"""
        lp = LinearProgram("export")
        x, y = lp.free("x"), lp.nonneg("y")
        lp.add({x: 1, y: 1}, Sense.EQ, 1)
        lp.add({x: 2}, Sense.GE, -1)
        lp.add({y: 1}, Sense.LE, 3)
        a_eq, b_eq, a_ub, b_ub = constraint_arrays(lp)

        assert a_eq == [[1.0, 1.0]] and b_eq == [1.0]
        assert a_ub == [[-2.0, -0.0], [0.0, 1.0]] and b_ub == [1.0, 3.0]
        assert list(variable_bounds(lp)) == [(None, None), (0.0, None)]
