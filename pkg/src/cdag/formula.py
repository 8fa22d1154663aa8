"""Symbolic probability expressions and exact evaluation on joint tables.

Expression trees have five node kinds: conditional probabilities,
products, sums over bound variables, fractions, and the constant one.
Bound variables are given fresh primed names when they would otherwise
collide with free variables, so a rendered formula reads the usual way,
e.g. ``Sum_s P(s|x) Sum_{x'} P(y|x',s) P(x')``.

Expression variables may name clusters; at evaluation time a cluster
name expands to the joint assignment of its member variables in the
table (pass the partition's cluster map).  Equivalence of expressions is
decided numerically on full-support tables rather than by a symbolic
normal form.
"""

import itertools
import json
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np


class FormulaError(ValueError):
    pass


class UnknownVariableError(FormulaError):
    pass


class ZeroConditioningMass(FormulaError):
    """A conditional probability was evaluated at a zero-mass conditioning event."""


# ---------------------------------------------------------------------------
# expression nodes
# ---------------------------------------------------------------------------

class ProbExpr:
    __slots__ = ()

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def __repr__(self):
        return render(self, "text")


class _One(ProbExpr):
    __slots__ = ()

    def _key(self):
        return ()


ONE = _One()


class CondProb(ProbExpr):
    """P(target | given); the two variable tuples must be disjoint."""

    __slots__ = ("target", "given")

    def __init__(self, target: Iterable[str], given: Iterable[str] = ()):
        target = tuple(sorted(set(target)))
        given = tuple(sorted(set(given)))
        if not target:
            raise FormulaError("conditional probability needs at least one target variable")
        if set(target) & set(given):
            raise FormulaError("target and given variables overlap: "
                               f"{sorted(set(target) & set(given))}")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "given", given)

    def __setattr__(self, *a):
        raise AttributeError("CondProb is immutable")

    def _key(self):
        return (self.target, self.given)


class Product(ProbExpr):
    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[ProbExpr]):
        object.__setattr__(self, "factors", tuple(factors))

    def __setattr__(self, *a):
        raise AttributeError("Product is immutable")

    def _key(self):
        return self.factors


class Sum(ProbExpr):
    """Sum of the body over all joint values of the bound variables."""

    __slots__ = ("bound", "body")

    def __init__(self, bound: Iterable[str], body: ProbExpr):
        bound = tuple(bound)
        if len(set(bound)) != len(bound):
            raise FormulaError(f"duplicate bound variables: {bound}")
        object.__setattr__(self, "bound", bound)
        object.__setattr__(self, "body", body)

    def __setattr__(self, *a):
        raise AttributeError("Sum is immutable")

    def _key(self):
        return (self.bound, self.body)


class Fraction(ProbExpr):
    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: ProbExpr, denominator: ProbExpr):
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __setattr__(self, *a):
        raise AttributeError("Fraction is immutable")

    def _key(self):
        return (self.numerator, self.denominator)


def product_of(factors: Sequence[ProbExpr]) -> ProbExpr:
    """Product with the trivial cases collapsed."""
    factors = [f for f in factors if f is not ONE]
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return Product(factors)


def sum_over(bound: Iterable[str], body: ProbExpr) -> ProbExpr:
    bound = tuple(bound)
    if not bound:
        return body
    return Sum(bound, body)


def free_vars(e: ProbExpr) -> frozenset:
    """Variables occurring free in ``e`` (bound names shadow outer ones)."""

    def walk(node, scope):
        if isinstance(node, _One):
            return frozenset()
        if isinstance(node, CondProb):
            return frozenset(v for v in node.target + node.given if v not in scope)
        if isinstance(node, Product):
            out = frozenset()
            for f in node.factors:
                out |= walk(f, scope)
            return out
        if isinstance(node, Sum):
            return walk(node.body, scope | set(node.bound))
        if isinstance(node, Fraction):
            return walk(node.numerator, scope) | walk(node.denominator, scope)
        raise TypeError(f"not a ProbExpr: {node!r}")

    return walk(e, frozenset())


def _base_name(name: str) -> str:
    return name.rstrip("'")


def alpha_normalize(e: ProbExpr, reserved: Iterable[str] = ()) -> ProbExpr:
    """Rename bound variables so they are unique across the expression and
    disjoint from the free variables, priming names as needed.  Names in
    ``reserved`` are treated as taken even when they do not occur free
    (identification reserves its query variables this way)."""
    used = set(free_vars(e)) | set(reserved)

    def fresh(name):
        candidate = name
        while candidate in used:
            candidate += "'"
        used.add(candidate)
        return candidate

    def walk(node, env):
        if isinstance(node, _One):
            return node
        if isinstance(node, CondProb):
            return CondProb([env.get(v, v) for v in node.target],
                            [env.get(v, v) for v in node.given])
        if isinstance(node, Product):
            return Product([walk(f, env) for f in node.factors])
        if isinstance(node, Fraction):
            return Fraction(walk(node.numerator, env), walk(node.denominator, env))
        if isinstance(node, Sum):
            env2 = dict(env)
            renamed = []
            for v in node.bound:
                nv = fresh(v)
                env2[v] = nv
                renamed.append(nv)
            return Sum(renamed, walk(node.body, env2))
        raise TypeError(f"not a ProbExpr: {node!r}")

    return walk(e, {})


# ---------------------------------------------------------------------------
# simplification
# ---------------------------------------------------------------------------

def _flatten_product(node):
    out = []
    for f in node.factors:
        f = _simplify(f)
        if isinstance(f, Product):
            out.extend(f.factors)
        elif f is not ONE:
            out.append(f)
    return out


def _cancel(num_factors, den_factors):
    # Cancel structurally identical factors, then collapse conditional
    # ratios P(a,b|g) / P(b|g) -> P(a|b,g).
    num = list(num_factors)
    den = list(den_factors)
    for d in list(den):
        if d in num:
            num.remove(d)
            den.remove(d)
    changed = True
    while changed:
        changed = False
        for d in den:
            if not isinstance(d, CondProb):
                continue
            for i, n in enumerate(num):
                if (isinstance(n, CondProb) and n.given == d.given
                        and set(d.target) < set(n.target)):
                    rest = tuple(sorted(set(n.target) - set(d.target)))
                    num[i] = CondProb(rest, set(n.given) | set(d.target))
                    den.remove(d)
                    changed = True
                    break
            if changed:
                break
    return num, den


def _simplify(node):
    if isinstance(node, (_One, CondProb)):
        return node
    if isinstance(node, Product):
        return product_of(_flatten_product(node))
    if isinstance(node, Fraction):
        num = _simplify(node.numerator)
        den = _simplify(node.denominator)
        if den is ONE:
            return num
        if num == den:
            return ONE
        num_factors = list(num.factors) if isinstance(num, Product) else [num]
        den_factors = list(den.factors) if isinstance(den, Product) else [den]
        num_factors, den_factors = _cancel(num_factors, den_factors)
        if not den_factors:
            return product_of(num_factors)
        return Fraction(product_of(num_factors), product_of(den_factors))
    if isinstance(node, Sum):
        body = _simplify(node.body)
        bound = list(node.bound)
        if isinstance(body, Sum) and not set(bound) & set(body.bound):
            bound += list(body.bound)
            body = body.body
        # Normalization: a factor P(t|g) whose targets are bound here and
        # occur nowhere else in the body sums to one and can be dropped.
        factors = list(body.factors) if isinstance(body, Product) else [body]
        changed = True
        while changed:
            changed = False
            for i, f in enumerate(factors):
                if not isinstance(f, CondProb):
                    continue
                targets = set(f.target)
                if not targets <= set(bound):
                    continue
                if targets & set(f.given):
                    continue
                elsewhere = set()
                for j, other in enumerate(factors):
                    if j != i:
                        elsewhere |= free_vars(other)
                if targets & elsewhere:
                    continue
                factors.pop(i)
                bound = [v for v in bound if v not in targets]
                changed = True
                break
        body = product_of(factors)
        if not bound:
            return body
        if body is ONE:
            # Sum over variables of a constant body cannot be collapsed
            # without cardinalities; it never arises from identification.
            return Sum(bound, body)
        return Sum(bound, body)
    raise TypeError(f"not a ProbExpr: {node!r}")


def simplify(e: ProbExpr, reserved: Iterable[str] = ()) -> ProbExpr:
    """Apply the fixed rewrite rules to a fixpoint and normalize names.

    Rules: flatten products and drop unit factors, merge nested sums,
    cancel identical factors in fractions, collapse conditional ratios,
    and drop normalized factors under their own sums.  The result is
    idempotent and evaluation-equivalent to the input.
    """
    previous = None
    current = e
    while current != previous:
        previous = current
        current = _simplify(current)
    return alpha_normalize(current, reserved)


# ---------------------------------------------------------------------------
# joint tables
# ---------------------------------------------------------------------------

class JointTable:
    """A dense joint distribution over finitely-valued named variables."""

    __slots__ = ("variables", "cards", "probs", "_index", "_marg_cache")

    def __init__(self, variables: Sequence[str], probs: np.ndarray):
        variables = tuple(variables)
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != len(variables):
            raise FormulaError(f"array rank {probs.ndim} does not match "
                               f"{len(variables)} variables")
        if np.any(probs < 0):
            raise FormulaError("negative probability entries")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise FormulaError(f"probabilities sum to {total!r}, not 1")
        self.variables = variables
        self.cards = tuple(probs.shape)
        self.probs = probs
        self._index = {v: i for i, v in enumerate(variables)}
        self._marg_cache = {}

    def card(self, variable: str) -> int:
        try:
            return self.cards[self._index[variable]]
        except KeyError:
            raise UnknownVariableError(f"unknown table variable {variable!r}") from None

    def marginal(self, variables: Iterable[str]) -> np.ndarray:
        """Marginal array over ``variables`` in table order (cached)."""
        keep = frozenset(variables)
        unknown = keep - set(self.variables)
        if unknown:
            raise UnknownVariableError(f"unknown table variable(s): {sorted(unknown)}")
        if keep not in self._marg_cache:
            axes = tuple(i for i, v in enumerate(self.variables) if v not in keep)
            self._marg_cache[keep] = self.probs.sum(axis=axes) if axes else self.probs
        return self._marg_cache[keep]

    def prob_of(self, assignment: Dict[str, int]) -> float:
        """Probability of a (possibly partial) assignment."""
        arr = self.marginal(assignment)
        order = [v for v in self.variables if v in assignment]
        return float(arr[tuple(assignment[v] for v in order)])

    def to_csv(self) -> str:
        """One row per joint state, header of variable names plus ``p``."""
        lines = [",".join(self.variables + ("p",))]
        for state in itertools.product(*(range(c) for c in self.cards)):
            lines.append(",".join(str(s) for s in state)
                         + f",{float(self.probs[state])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "JointTable":
        rows = [line.strip() for line in text.strip().splitlines() if line.strip()]
        header = rows[0].split(",")
        if header[-1] != "p":
            raise FormulaError("last CSV column must be the probability column 'p'")
        variables = tuple(header[:-1])
        states = []
        values = []
        for line in rows[1:]:
            cells = line.split(",")
            if len(cells) != len(header):
                raise FormulaError(f"bad CSV row: {line!r}")
            states.append(tuple(int(c) for c in cells[:-1]))
            values.append(float(cells[-1]))
        cards = tuple(max(s[i] for s in states) + 1 for i in range(len(variables)))
        expected = int(np.prod(cards)) if variables else 1
        if len(states) != expected or len(set(states)) != len(states):
            raise FormulaError("CSV must enumerate every joint state exactly once")
        probs = np.zeros(cards)
        for state, value in zip(states, values):
            probs[state] = value
        return cls(variables, probs)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _resolver(table: JointTable, clusters: Optional[Dict[str, Sequence[str]]]):
    clusters = clusters or {}

    def resolve(name):
        base = _base_name(name)
        if base in table._index:
            return (base,)
        if base in clusters:
            return tuple(clusters[base])
        raise UnknownVariableError(f"variable {name!r} is neither a table variable "
                                   "nor a known cluster")

    return resolve


def evaluate(e: ProbExpr, t: JointTable, assignment: Dict[str, int],
             clusters: Optional[Dict[str, Sequence[str]]] = None,
             zero_division: str = "raise") -> float:
    """Evaluate ``e`` on the joint table at the given free-variable values.

    ``assignment`` maps table variables to state indices and must cover
    the member variables of every free expression variable.  Cluster
    names resolve through ``clusters`` to their member variables; bound
    cluster variables are enumerated over the members' joint state space.

    ``zero_division`` controls conditionals with zero conditioning mass:
    ``"raise"`` raises :class:`ZeroConditioningMass` (full-support tables
    never trigger it), ``"zero"`` uses the plug-in convention 0/0 = 0 for
    empirical tables.
    """
    if zero_division not in ("raise", "zero"):
        raise FormulaError(f"bad zero_division mode {zero_division!r}")
    resolve = _resolver(t, clusters)
    context: Dict[str, Tuple[int, ...]] = {}
    for name in sorted(free_vars(e)):
        group = resolve(name)
        try:
            context[name] = tuple(assignment[v] for v in group)
        except KeyError as err:
            raise FormulaError(f"assignment is missing variable {err.args[0]!r} "
                               f"needed by {name!r}") from None

    def cond_value(node):
        pairs = {}
        for name in node.target + node.given:
            for var, val in zip(resolve(name), context[name]):
                if var in pairs:
                    raise FormulaError(f"variable {var!r} indexed twice in P({node})")
                pairs[var] = val
        given_pairs = {}
        for name in node.given:
            for var, val in zip(resolve(name), context[name]):
                given_pairs[var] = val
        denom = t.prob_of(given_pairs) if given_pairs else 1.0
        if denom <= 0.0:
            if zero_division == "zero":
                return 0.0
            raise ZeroConditioningMass(
                f"conditioning event has zero probability in P({render(node, 'text')})")
        return t.prob_of(pairs) / denom

    def walk(node):
        if isinstance(node, _One):
            return 1.0
        if isinstance(node, CondProb):
            return cond_value(node)
        if isinstance(node, Product):
            out = 1.0
            for f in node.factors:
                out *= walk(f)
                if out == 0.0:
                    return 0.0
            return out
        if isinstance(node, Fraction):
            den = walk(node.denominator)
            if den == 0.0:
                if zero_division == "zero":
                    return 0.0
                raise ZeroConditioningMass("fraction denominator evaluated to zero")
            return walk(node.numerator) / den
        if isinstance(node, Sum):
            groups = [resolve(v) for v in node.bound]
            spaces = [tuple(itertools.product(*(range(t.card(m)) for m in grp)))
                      for grp in groups]
            saved = {v: context.get(v) for v in node.bound}
            total = 0.0
            for combo in itertools.product(*spaces):
                for v, val in zip(node.bound, combo):
                    context[v] = val
                total += walk(node.body)
            for v, old in saved.items():
                if old is None:
                    context.pop(v, None)
                else:
                    context[v] = old
            return total
        raise TypeError(f"not a ProbExpr: {node!r}")

    return walk(e)


def tabulate(e: ProbExpr, t: JointTable,
             clusters: Optional[Dict[str, Sequence[str]]] = None,
             zero_division: str = "raise"):
    """Evaluate ``e`` at every free-variable assignment in one pass.

    Returns ``(variables, array)`` where ``variables`` are the member
    variables of the free expression names and the array carries one
    value per joint assignment, axes in that order.  Agreement with the
    pointwise :func:`evaluate` is part of the test suite; this path is
    what the simulation harness uses for bulk evaluation.
    """
    if zero_division not in ("raise", "zero"):
        raise FormulaError(f"bad zero_division mode {zero_division!r}")
    resolve = _resolver(t, clusters)

    # Axes are (expression name, member variable) pairs so that a bound
    # primed name never collides with the free name sharing its base.
    def axes_of(names):
        return [(n, m) for n in names for m in resolve(n)]

    def join(a_axes, a_arr, b_axes, b_arr):
        axes = list(a_axes) + [ax for ax in b_axes if ax not in a_axes]

        def view(f_axes, arr):
            perm = [f_axes.index(ax) for ax in axes if ax in f_axes]
            arr = np.transpose(arr, perm)
            shape = [t.card(ax[1]) if ax in f_axes else 1 for ax in axes]
            return arr.reshape(shape)

        return axes, view(a_axes, a_arr) * view(b_axes, b_arr)

    def divide(num, den):
        if zero_division == "zero":
            return np.divide(num, den, out=np.zeros(np.broadcast_shapes(
                num.shape, den.shape)), where=den > 0)
        if np.any(den <= 0.0):
            raise ZeroConditioningMass("conditioning event with zero probability")
        return num / den

    def walk(node):
        if isinstance(node, _One):
            return [], np.array(1.0)
        if isinstance(node, CondProb):
            all_axes = axes_of(node.target + node.given)
            given_axes = axes_of(node.given)
            if len({m for _, m in all_axes}) != len(all_axes):
                raise FormulaError(f"variable indexed twice in {render(node, 'text')}")
            joint_vars = [m for _, m in all_axes]
            num = t.marginal(joint_vars)
            # marginal axes come in table order; label then reorder
            table_order = [ax for v in t.variables for ax in all_axes if ax[1] == v]
            perm = [table_order.index(ax) for ax in all_axes]
            num = np.transpose(num, perm)
            if not given_axes:
                return all_axes, num
            den_axes, den = walk(CondProb([n for n in node.given]))
            _, den_view = join(all_axes, np.ones_like(num), den_axes, den)
            return all_axes, divide(num, den_view)
        if isinstance(node, Product):
            axes, arr = [], np.array(1.0)
            for f in node.factors:
                f_axes, f_arr = walk(f)
                axes, arr = join(axes, arr, f_axes, f_arr)
            return axes, arr
        if isinstance(node, Fraction):
            n_axes, n_arr = walk(node.numerator)
            d_axes, d_arr = walk(node.denominator)
            axes = list(n_axes) + [ax for ax in d_axes if ax not in n_axes]
            _, num = join(axes, np.ones([t.card(m) for _, m in axes]), n_axes, n_arr)
            _, den = join(axes, np.ones([t.card(m) for _, m in axes]), d_axes, d_arr)
            return axes, divide(num, den)
        if isinstance(node, Sum):
            axes, arr = walk(node.body)
            drop = [i for i, (n, _) in enumerate(axes) if n in node.bound]
            arr = arr.sum(axis=tuple(drop)) if drop else arr
            return [ax for i, ax in enumerate(axes) if i not in drop], arr
        raise TypeError(f"not a ProbExpr: {node!r}")

    axes, arr = walk(e)
    variables = tuple(m for _, m in axes)
    return variables, arr


def evaluate_all(e: ProbExpr, t: JointTable,
                 clusters: Optional[Dict[str, Sequence[str]]] = None,
                 zero_division: str = "raise"):
    """Dict from free-variable assignments to values, via :func:`tabulate`."""
    variables, arr = tabulate(e, t, clusters, zero_division)
    out = {}
    for state in itertools.product(*(range(t.card(v)) for v in variables)):
        out[tuple(zip(variables, state))] = float(arr[state]) if variables else float(arr)
    return out


def equivalent_on(e1: ProbExpr, e2: ProbExpr, t: JointTable,
                  clusters: Optional[Dict[str, Sequence[str]]] = None,
                  tol: float = 1e-9) -> bool:
    """True iff the expressions agree within ``tol`` at every assignment
    of their (shared) free variables."""
    names = sorted(free_vars(e1) | free_vars(e2))
    resolve = _resolver(t, clusters)
    table_vars = sorted({v for n in names for v in resolve(n)})
    for state in itertools.product(*(range(t.card(v)) for v in table_vars)):
        assignment = dict(zip(table_vars, state))
        v1 = evaluate(e1, t, assignment, clusters)
        v2 = evaluate(e2, t, assignment, clusters)
        if abs(v1 - v2) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _sub(name: str) -> str:
    return name if len(name) == 1 else "{" + name + "}"


def _render_text(node, prec=0):
    # prec 0: bare; 1: trailing position in a product (a sum may extend
    # rightward without parentheses); 2: must be atomic.
    if isinstance(node, _One):
        return "1"
    if isinstance(node, CondProb):
        head = ",".join(v.lower() for v in node.target)
        if node.given:
            return f"P({head}|{','.join(v.lower() for v in node.given)})"
        return f"P({head})"
    if isinstance(node, Product):
        parts = [_render_text(f, 2) for f in node.factors[:-1]]
        parts.append(_render_text(node.factors[-1], min(prec, 1)))
        inner = " ".join(parts)
        return f"({inner})" if prec >= 2 else inner
    if isinstance(node, Sum):
        body = _render_text(node.body, 1)
        out = f"Σ_{_sub(','.join(v.lower() for v in node.bound))} {body}"
        return f"({out})" if prec >= 2 else out
    if isinstance(node, Fraction):
        return (f"[{_render_text(node.numerator, 0)} / "
                f"{_render_text(node.denominator, 0)}]")
    raise TypeError(f"not a ProbExpr: {node!r}")


def _render_latex(node, prec=0):
    if isinstance(node, _One):
        return "1"
    if isinstance(node, CondProb):
        head = ", ".join(v.lower() for v in node.target)
        if node.given:
            return f"P({head} \\mid {', '.join(v.lower() for v in node.given)})"
        return f"P({head})"
    if isinstance(node, Product):
        parts = [_render_latex(f, 2) for f in node.factors[:-1]]
        parts.append(_render_latex(node.factors[-1], min(prec, 1)))
        inner = " ".join(parts)
        return f"\\left({inner}\\right)" if prec >= 2 else inner
    if isinstance(node, Sum):
        body = _render_latex(node.body, 1)
        out = f"\\sum_{{{', '.join(v.lower() for v in node.bound)}}} {body}"
        return f"\\left({out}\\right)" if prec >= 2 else out
    if isinstance(node, Fraction):
        return (f"\\frac{{{_render_latex(node.numerator, 0)}}}"
                f"{{{_render_latex(node.denominator, 0)}}}")
    raise TypeError(f"not a ProbExpr: {node!r}")


def _to_json_obj(node):
    if isinstance(node, _One):
        return {"kind": "one"}
    if isinstance(node, CondProb):
        return {"kind": "condprob",
                "vars": {"target": list(node.target), "given": list(node.given)}}
    if isinstance(node, Product):
        return {"kind": "product", "children": [_to_json_obj(f) for f in node.factors]}
    if isinstance(node, Sum):
        return {"kind": "sum", "vars": {"bound": list(node.bound)},
                "children": [_to_json_obj(node.body)]}
    if isinstance(node, Fraction):
        return {"kind": "fraction",
                "children": [_to_json_obj(node.numerator), _to_json_obj(node.denominator)]}
    raise TypeError(f"not a ProbExpr: {node!r}")


def render(e: ProbExpr, format: str = "text") -> str:
    """Deterministic rendering of an expression.

    ``text`` and ``latex`` lowercase variable names for the usual
    P(y|x,z) look; ``json`` is the faithful machine format and round
    trips through :func:`parse_formula_json`.
    """
    if format == "text":
        return _render_text(e)
    if format == "latex":
        return _render_latex(e)
    if format == "json":
        return json.dumps(_to_json_obj(e), indent=None, separators=(",", ":"))
    raise FormulaError(f"unknown render format {format!r}")


def _from_json_obj(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise FormulaError(f"bad formula JSON node: {obj!r}")
    kind = obj["kind"]
    if kind == "one":
        return ONE
    if kind == "condprob":
        v = obj.get("vars", {})
        return CondProb(v.get("target", []), v.get("given", []))
    if kind == "product":
        return Product([_from_json_obj(ch) for ch in obj.get("children", [])])
    if kind == "sum":
        children = obj.get("children", [])
        if len(children) != 1:
            raise FormulaError("sum node needs exactly one child")
        return Sum(obj.get("vars", {}).get("bound", []), _from_json_obj(children[0]))
    if kind == "fraction":
        children = obj.get("children", [])
        if len(children) != 2:
            raise FormulaError("fraction node needs exactly two children")
        return Fraction(_from_json_obj(children[0]), _from_json_obj(children[1]))
    raise FormulaError(f"unknown formula node kind {kind!r}")


def parse_formula_json(text: str) -> ProbExpr:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise FormulaError(f"invalid JSON: {err}") from None
    return _from_json_obj(obj)
