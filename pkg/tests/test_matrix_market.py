import numpy as np
import pytest
import scipy.sparse as sp

from krylow.errors import ParseError, ValidationError
from krylow.matrix_market import read_matrix_market, write_matrix_market
from krylow.operators import adjacency_from_matrix_market

DATA = __import__("pathlib").Path(__file__).parent / "data"


def write(tmp_path, text, name="m.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_path_graph_fixture():
    op = adjacency_from_matrix_market(DATA / "path3.mtx")
    np.testing.assert_allclose(op.apply(np.ones(3)), [1.0, 2.0, 1.0])


def test_lower_triangle_symmetrized(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate pattern symmetric\n4 4 3\n2 1\n3 1\n4 3\n")
    A = read_matrix_market(p).toarray()
    np.testing.assert_array_equal(A, A.T)
    assert A[0, 1] == A[1, 0] == 1.0


def test_both_triangles_not_doubled(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 2 5\n2 1 5\n1 1 2\n")
    np.testing.assert_array_equal(read_matrix_market(p).toarray(), [[2.0, 5.0], [5.0, 0.0]])


def test_general_averaged(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 2 4\n2 3 1\n3 3 7\n")
    D = np.zeros((3, 3))
    D[0, 1], D[1, 2], D[2, 2] = 4, 1, 7
    np.testing.assert_allclose(read_matrix_market(p).toarray(), 0.5 * (D + D.T))


def test_duplicates_collapse(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 2\n2 1\n2 1\n")
    assert read_matrix_market(p).toarray()[1, 0] == 1.0


@pytest.mark.parametrize("text,line", [
    ("%%MatrixMarket matrix array real general\n2 2\n", 1),
    ("hello\n", 1),
    ("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 1\n1 x 3\n", 4),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1\n", 3),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n", None),
])
def test_parse_errors(tmp_path, text, line):
    with pytest.raises(ParseError) as info:
        read_matrix_market(write(tmp_path, text))
    if line is not None:
        assert info.value.lineno == line
        assert f"line {line}" in str(info.value)


def test_out_of_bounds(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n3 1\n")
    with pytest.raises(ValidationError, match="line 3"):
        read_matrix_market(p)


def test_nonsquare(tmp_path):
    with pytest.raises(ValidationError):
        read_matrix_market(write(tmp_path, "%%MatrixMarket matrix coordinate pattern general\n2 3 0\n"))


@pytest.mark.parametrize("field", ["pattern", "real"])
def test_round_trip(tmp_path, rng, field):
    M = sp.random(15, 15, density=0.2, random_state=np.random.RandomState(1))
    M = M + M.T
    if field == "pattern":
        M.data[:] = 1.0
    p = tmp_path / "out.mtx"
    write_matrix_market(p, M, field=field, comment="round trip")
    np.testing.assert_allclose(read_matrix_market(p).toarray(), M.toarray())
