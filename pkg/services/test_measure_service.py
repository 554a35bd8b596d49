from fractions import Fraction

import numpy as np
import pytest

from models.measure import AperiodicityStatus
from services.measure_service import (
    affine_rank,
    aperiodicity,
    covariance,
    hull_contains_interior,
    load_measure,
    moments,
    require_inverse,
    support_hull,
    validate,
)
from utils.errors import DegenerateHull, DimensionMismatch, InvariantError, ParseError, SingularCovariance
from utils.measure_io import (
    dump_measure,
    load_measure_file,
    measure_from_entries,
    parse_int_list,
    parse_measure,
    parse_vector,
)


LAZY_TEXT = """# lazy walk
dim 1
steplength 1
-1 1/4
0 0.5
1 1/4
"""


def test_parse_keeps_exact_masses() -> None:
    m = load_measure(LAZY_TEXT)
    assert m.dimension == 1
    assert m.steplength == 1
    assert m.support_size == 3
    assert m.exact == (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))
    assert m.prob((0,)) == 0.5
    assert m.prob((5,)) == 0.0
    assert m.prob_exact((1,)) == Fraction(1, 4)


def test_parse_rejects_bad_mass(measures_dir) -> None:
    with pytest.raises(InvariantError, match="total mass"):
        parse_measure((measures_dir / "bad_mass.txt").read_text())


@pytest.mark.parametrize(
    "body, error",
    [
        ("-1 1/2\n1 1/2\n1 0\n", ParseError),  # duplicate point
        ("-1 1/2\n1\n", InvariantError),  # missing probability
        ("a 1/2\n1 1/2\n", ParseError),  # non-integer coordinate
        ("-1 3/2\n1 -1/2\n", InvariantError),  # negative mass
        ("-2 1/2\n1 1/2\n", InvariantError),  # outside the steplength ball
        ("-1 x\n1 1/2\n", ParseError),
    ],
)
def test_parse_errors(body: str, error) -> None:
    with pytest.raises(error):
        parse_measure("dim 1\nsteplength 1\n" + body)


def test_parse_rejects_bad_headers() -> None:
    with pytest.raises(ParseError):
        parse_measure("dimension 1\nsteplength 1\n0 1\n")
    with pytest.raises(InvariantError):
        parse_measure("dim 0\nsteplength 1\n")
    with pytest.raises(ParseError):
        parse_measure("dim 1\n")


def test_dump_and_parse_agree(product2d) -> None:
    text = dump_measure(product2d, comments=["n = 1"])
    assert text.startswith("# n = 1\ndim 2\nsteplength 2\n")
    again = parse_measure(text)
    assert again.exact == product2d.exact
    assert np.array_equal(again.points, product2d.points)


def test_vector_parsing() -> None:
    assert parse_vector("1,-2", 2, integral=True).tolist() == [1, -2]
    assert parse_vector("1/2", 1).tolist() == [0.5]
    assert parse_int_list("50, 100,200") == [50, 100, 200]
    with pytest.raises(ParseError):
        parse_vector("1,2", 3)
    with pytest.raises(ParseError):
        parse_int_list("1,x")


def test_lazy_moments(lazy) -> None:
    table = moments(lazy, 4)
    assert table[(0,)] == 1.0
    assert table[(1,)] == 0.0
    assert table[(2,)] == pytest.approx(0.5)
    assert table[(3,)] == 0.0
    assert table[(4,)] == pytest.approx(0.5)
    assert table.mean.tolist() == [0.0]


def test_product_moments_factor(product2d) -> None:
    table = moments(product2d, 4)
    assert table[(2, 2)] == pytest.approx(0.25)
    assert table[(1, 1)] == pytest.approx(0.0)
    assert table[(4, 0)] == pytest.approx(0.5)


def test_covariance_and_maximality(lazy, product2d, line2d) -> None:
    cov = covariance(lazy)
    assert cov.matrix[0, 0] == pytest.approx(0.5)
    assert cov.smallest_eigenvalue == pytest.approx(0.5)
    assert require_inverse(cov)[0, 0] == pytest.approx(2.0)

    cov2 = covariance(product2d)
    assert np.allclose(cov2.matrix, 0.5 * np.eye(2))
    assert cov2.determinant == pytest.approx(0.25)

    flat = covariance(line2d)
    assert not flat.positive_definite
    with pytest.raises(SingularCovariance):
        require_inverse(flat)


def test_affine_rank(lazy, product2d, line2d) -> None:
    assert affine_rank(lazy) == 1
    assert affine_rank(product2d) == 2
    assert affine_rank(line2d) == 1
    point = measure_from_entries(2, 1, {(0, 0): Fraction(1)})
    assert affine_rank(point) == 0


def test_hull_interior_1d(lazy, asym) -> None:
    hull = support_hull(lazy)
    assert hull.vertices.reshape(-1).tolist() == [-1, 1]
    assert hull_contains_interior(hull, [0.0])
    assert hull_contains_interior(hull, [0.999])
    assert not hull_contains_interior(hull, [1.0])
    assert not hull_contains_interior(hull, [-1.5])
    assert hull_contains_interior(support_hull(asym), [1.9])
    with pytest.raises(DimensionMismatch):
        hull_contains_interior(hull, [0.0, 0.0])


def test_hull_interior_2d(product2d, line2d) -> None:
    hull = support_hull(product2d)
    assert hull.volume == pytest.approx(4.0)
    assert hull_contains_interior(hull, [0.5, -0.5])
    assert not hull_contains_interior(hull, [1.0, 0.0])
    assert not hull_contains_interior(hull, [1.2, 0.0])

    flat = support_hull(line2d)
    assert flat.degenerate
    with pytest.raises(DegenerateHull):
        hull_contains_interior(flat, [0.0, 0.0])


def test_hull_interior_high_dimension_uses_feasibility() -> None:
    entries = {(0, 0, 0, 0): Fraction(1, 9)}
    for j in range(4):
        for sign in (-1, 1):
            x = [0, 0, 0, 0]
            x[j] = sign
            entries[tuple(x)] = Fraction(1, 9)
    m = measure_from_entries(4, 1, entries)
    hull = support_hull(m)
    assert hull.equations is None
    assert hull_contains_interior(hull, [0.0, 0.0, 0.0, 0.0])
    assert hull_contains_interior(hull, [0.2, -0.2, 0.1, 0.0])
    assert not hull_contains_interior(hull, [0.5, 0.5, 0.0, 0.0])
    assert not hull_contains_interior(hull, [1.0, 0.0, 0.0, 0.0])


def test_aperiodicity(lazy, simple, shifted) -> None:
    assert aperiodicity(lazy).status == AperiodicityStatus.YES
    assert aperiodicity(shifted).status == AperiodicityStatus.YES

    periodic = aperiodicity(simple)
    assert periodic.status == AperiodicityStatus.NO
    assert periodic.period == 2
    assert periodic.render() == "no (period 2)"


def test_aperiodicity_period_three() -> None:
    m = measure_from_entries(1, 2, {(1,): Fraction(2, 3), (-2,): Fraction(1, 3)})
    result = aperiodicity(m)
    assert result.status == AperiodicityStatus.NO
    assert result.period == 3
    assert result.return_times[:2] == [3, 6]


def test_aperiodicity_undetermined_below_cap() -> None:
    m = measure_from_entries(1, 10, {(1,): Fraction(1, 2), (-10,): Fraction(1, 2)})
    result = aperiodicity(m, cap=5)
    assert result.status == AperiodicityStatus.UNDETERMINED
    assert result.render() == "undetermined (cap 5)"


def test_validate(lazy, simple, line2d) -> None:
    report = validate(lazy)
    assert report.ok
    assert report.gamma == pytest.approx(0.5)
    assert report.affine_rank == 1
    assert report.char_fn_gap is not None and report.char_fn_gap < 1.0

    periodic = validate(simple)
    assert not periodic.ok
    assert periodic.maximal
    assert periodic.char_fn_gap is None

    flat = validate(line2d)
    assert not flat.maximal
    assert not flat.ok


def test_load_rejects_undecodable_file(tmp_path) -> None:
    path = tmp_path / "latin.txt"
    path.write_bytes(b"dim 1\nsteplength 1\n# \xff\xfe\n0 1\n")
    with pytest.raises(ParseError):
        load_measure_file(path)


def test_parse_rejects_coordinates_beyond_int64() -> None:
    big = 10 ** 20
    with pytest.raises(InvariantError):
        parse_measure(f"dim 1\nsteplength {big}\n{big} 1\n")


@pytest.mark.parametrize("name", ["lazy", "asym", "product2d"])
def test_moments_bounded_by_steplength(name, request) -> None:
    m = request.getfixturevalue(name)
    table = moments(m, 6)
    for nu, value in table.values.items():
        assert abs(value) <= m.steplength ** sum(nu) + 1e-12, nu


@pytest.mark.parametrize("name", ["lazy", "asym", "product2d"])
def test_covariance_spectrum_bounded(name, request) -> None:
    m = request.getfixturevalue(name)
    cov = covariance(m)
    assert float(np.max(cov.eigenvalues)) <= m.dimension * m.steplength ** 2
    assert cov.smallest_eigenvalue > 0


def _rational_grid(lo: int, hi: int, d: int):
    values = sorted({Fraction(p, q) for q in (1, 2, 3, 4, 7) for p in range(lo * q, hi * q + 1)})
    if d == 1:
        return [(v,) for v in values]
    return [(u, v) for u in values for v in values]


def _strictly_inside_polygon(vertices, point) -> bool:
    """vertices in counter-clockwise order"""
    x, y = point
    for (ax, ay), (bx, by) in zip(vertices, vertices[1:] + vertices[:1]):
        if (bx - ax) * (y - ay) - (by - ay) * (x - ax) <= 0:
            return False
    return True


@pytest.mark.parametrize("name", ["lazy", "asym"])
def test_hull_interior_matches_scan_1d(name, request) -> None:
    m = request.getfixturevalue(name)
    hull = support_hull(m)
    lo, hi = int(m.support.min()), int(m.support.max())
    for (xi,) in _rational_grid(lo - 1, hi + 1, 1):
        assert hull_contains_interior(hull, [float(xi)]) == (lo < xi < hi), xi


def test_hull_interior_matches_scan_2d(product2d) -> None:
    triangle = measure_from_entries(
        2,
        3,
        {(-1, -1): Fraction(1, 4), (2, -1): Fraction(1, 4), (-1, 2): Fraction(1, 4), (0, 0): Fraction(1, 4)},
    )
    cases = [
        (product2d, [(-1, -1), (1, -1), (1, 1), (-1, 1)]),
        (triangle, [(-1, -1), (2, -1), (-1, 2)]),
    ]
    for m, vertices in cases:
        hull = support_hull(m)
        for point in _rational_grid(-2, 3, 2):
            expected = _strictly_inside_polygon(vertices, point)
            assert hull_contains_interior(hull, [float(c) for c in point]) == expected, point
