import pytest

from itervote.fixtures import FIXTURES, verify_all, verify_paper_fixture


@pytest.mark.parametrize("name", ["example1", "example2", "table1_br_cycle", "table2_ldi_cycle", "example4"])
def test_fixture_passes(name):
    rep = verify_paper_fixture(name)
    assert rep.error is None
    assert rep.passed, [f"{c.name}: {c.detail}" for c in rep.failures]


def test_example4_covers_every_sub_check():
    rep = verify_paper_fixture("example4")
    for step in range(1, 5):
        names = [c.name for c in rep.checks if c.name.startswith(f"step {step} ")]
        assert {tag for tag in ("(i)", "(ii)", "(iii)") if any(tag in n for n in names)} == {"(i)", "(ii)", "(iii)"}


def test_example5_rows_agreeing_with_the_definitions_pass():
    rep = verify_paper_fixture("example5_radii_table")
    by_name = {c.name: c for c in rep.checks}
    assert by_name["LD^1 at r=(0, 0)"].passed
    assert by_name["LD^1 at r=(1, 0)"].passed
    assert rep.error is None


def test_unknown_fixture():
    with pytest.raises(KeyError):
        verify_paper_fixture("nope")


def test_verify_all_runs_every_fixture_in_order():
    assert [r.name for r in verify_all()] == list(FIXTURES)
    assert list(FIXTURES) == ["example1", "example2", "table1_br_cycle", "table2_ldi_cycle", "example4",
                              "example5_radii_table"]
