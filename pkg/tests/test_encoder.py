import itertools
import random

import pytest

from idforge.algebra import ResourceLimitError
from idforge.dpll import satisfies, solve
from idforge.encoder import (
    ModelError,
    decode,
    encode,
    export_dimacs,
    format_dimacs,
    load_cnf,
    parse_dimacs,
    parse_model,
    solve_instance,
    valuation_from_witness,
)
from idforge.identities import enumerate_identities
from idforge.statement import StatementParams, search_witness, verify_witness

MONO, TWO_ONE, DISTINCT = enumerate_identities(3)


def brute_sat(clauses, n):
    for bits in itertools.product([False, True], repeat=n):
        model = [v if bits[v - 1] else -v for v in range(1, n + 1)]
        if satisfies(model, clauses):
            return True
    return False


# -- DPLL --------------------------------------------------------------------


def test_dpll_against_brute_force():
    rng = random.Random(1)
    sat = unsat = 0
    for _ in range(300):
        n = rng.randint(1, 9)
        clauses = [[rng.choice([-1, 1]) * rng.randint(1, n) for _ in range(rng.randint(1, 3))]
                   for _ in range(rng.randint(1, 5 * n))]
        model = solve(clauses, n)
        expected = brute_sat(clauses, n)
        assert (model is not None) == expected
        if model is not None:
            assert satisfies(model, clauses) and sorted(map(abs, model)) == list(range(1, n + 1))
            sat += 1
        else:
            unsat += 1
    assert sat > 30 and unsat > 30


def test_dpll_edge_cases():
    model = solve([], 2)
    assert model is not None and sorted(map(abs, model)) == [1, 2]
    assert solve([[]], 1) is None
    assert solve([[1], [-1]], 1) is None
    assert solve([[1, -1]], 1) is not None


# -- DIMACS ------------------------------------------------------------------


def test_format_empty():
    assert format_dimacs(3, []) == "p cnf 3 0\n"


def test_format_unit():
    assert format_dimacs(1, [[1]]) == "p cnf 1 1\n1 0\n"


def test_parse_dimacs_round_trip():
    text = format_dimacs(4, [[1, -2], [3], [-4, 2, 1]], ["hello"])
    n, clauses, comments = parse_dimacs(text)
    assert (n, clauses, comments) == (4, [[1, -2], [3], [-4, 2, 1]], ["hello"])


def test_parse_dimacs_errors():
    with pytest.raises(ValueError, match="p cnf"):
        parse_dimacs("1 0\n")
    with pytest.raises(ValueError, match="declares"):
        parse_dimacs("p cnf 2 2\n1 0\n")


def test_export_and_reload_instance():
    params = StatementParams(MONO, 3, 2, (2, 2), (1, 1))
    cnf = encode(params, 2)
    text = export_dimacs(cnf)
    assert f"p cnf {cnf.num_vars} {len(cnf.clauses)}" in text
    assert any(line.startswith("c q w=0,1 L=1 m=1 i=0 var=") for line in text.splitlines())
    back = load_cnf(text)
    assert back.params == params and back.clauses == cnf.clauses
    assert back.p_vars == cnf.p_vars and back.q_vars == cnf.q_vars and back.pool == cnf.pool
    assert len(parse_dimacs(text)[1]) == len(cnf.clauses)


def test_parse_model_formats():
    assert parse_model("1 -2 3 0\n") == [1, -2, 3]
    assert parse_model("s SATISFIABLE\nv 1 -2\nv 3 0\n") == [1, -2, 3]
    with pytest.raises(ModelError):
        parse_model("s UNSATISFIABLE\n")


# -- variable map ------------------------------------------------------------


@pytest.mark.parametrize("kappa,lam,g,f", [(3, 2, (2, 2), (1, 1)), (2, 3, (1, 2, 2), (0, 1, 2)), (2, 2, (2, 1), (2, 2))])
def test_variable_count(kappa, lam, g, f):
    params = StatementParams(MONO, kappa, lam, g, f)
    cnf = encode(params, 3)
    pool = sum(params.f_at(L) for _, L in params.slots())
    q = sum(params.g_at(L) * (1 << (1 << params.f_at(L))) for _, L in params.slots())
    assert cnf.num_vars == pool * (pool - 1) // 2 + q
    used = {abs(lit) for c in cnf.clauses for lit in c}
    assert used <= set(range(1, cnf.num_vars + 1))


def test_term_tuple_pool_cap():
    with pytest.raises(ResourceLimitError):
        encode(StatementParams(MONO, 3, 2, (2, 2), (1, 1)), 2, pool="term-tuple")


def test_encode_guard():
    with pytest.raises(ResourceLimitError):
        encode(StatementParams(MONO, 3, 4, (1,) * 4, (1,) * 4), 2)


# -- models and decoding -----------------------------------------------------


def check_model_structure(cnf, model):
    true = {lit for lit in model if lit > 0}
    n = len(cnf.pool)
    for a, b, c in itertools.combinations(range(n), 3):
        ab, bc, ac = (cnf.p(a, b) in true), (cnf.p(b, c) in true), (cnf.p(a, c) in true)
        assert ab + bc + ac != 2, "p-relation not transitive"
    for (w, L) in cnf.params.slots():
        for m in range(1, cnf.params.g_at(L) + 1):
            group = [cnf.q_vars[(w, L, m, i)] for i in range(1 << (1 << cnf.params.f_at(L)))]
            assert sum(v in true for v in group) == 1


@pytest.mark.parametrize("ident,kappa,lam,g,f,budget,sat", [
    (MONO, 3, 2, (2, 2), (1, 1), 2, True),
    (TWO_ONE, 3, 2, (2, 2), (1, 1), 2, False),
    (DISTINCT, 2, 2, (2, 2), (1, 1), 2, True),
    (MONO, 3, 2, (1, 1), (1, 1), 2, False),
    (MONO, 3, 2, (2, 2), (1, 1), 1, True),
    (MONO, 2, 2, (2, 2), (1, 1), 0, False),
])
def test_encode_agrees_with_search(ident, kappa, lam, g, f, budget, sat):
    params = StatementParams(ident, kappa, lam, g, f)
    cnf = encode(params, budget)
    model = solve_instance(cnf)
    assert (model is not None) == sat == (search_witness(params, budget) is not None)
    if model is not None:
        check_model_structure(cnf, model)
        assert verify_witness(params, decode(model, cnf)).passed


def test_valuation_of_known_witness_decodes_back():
    params = StatementParams(MONO, 3, 2, (2, 2), (1, 1))
    witness = search_witness(params, 3)
    renamed = witness.renamed({g: 40 + 3 * g for g in witness.generators()})
    cnf = encode(params, 3)
    model = valuation_from_witness(cnf, renamed)
    assert satisfies(model, cnf.clauses)
    back = decode(model, cnf)
    assert back.canonical() == renamed.canonical() == witness.canonical()


def test_decode_rejects_bad_models():
    params = StatementParams(MONO, 3, 2, (2, 2), (1, 1))
    cnf = encode(params, 2)
    model = solve_instance(cnf)
    flipped = [-model[0]] + model[1:]
    if satisfies(flipped, cnf.clauses):
        flipped = [-lit for lit in model]
    with pytest.raises(ModelError, match="clause"):
        decode(flipped, cnf)
    with pytest.raises(ModelError, match="names no variable"):
        decode(model + [cnf.num_vars + 1], cnf)


@pytest.mark.parametrize("ident,kappa,lam,g,budget", [
    (MONO, 3, 1, (1,), 2),
    (TWO_ONE, 3, 1, (1,), 2),
    (MONO, 3, 1, (2,), 2),
    (DISTINCT, 2, 2, (2, 2), 2),
    (TWO_ONE, 3, 1, (2,), 1),
    (DISTINCT, 3, 1, (2,), 1),
    (TWO_ONE, 2, 2, (2, 2), 0),
])
def test_term_tuple_pool_agrees_with_slot_pool(ident, kappa, lam, g, budget):
    params = StatementParams(ident, kappa, lam, g, (1,) * lam)
    a = encode(params, budget, pool="slot")
    b = encode(params, budget, pool="term-tuple")
    ma, mb = solve_instance(a), solve_instance(b)
    assert (ma is None) == (mb is None) == (search_witness(params, budget) is None)
    if mb is not None:
        check_model_structure(b, mb)
        assert verify_witness(params, decode(mb, b)).passed
