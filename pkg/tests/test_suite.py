from hypothesis import given, settings, strategies as st

from app.services.smallstep import agree
from app.services.suite import ClosureGenerator, PropertySuite, run_suite
from app.services.typecheck import check_closure


def test_generator_is_deterministic():
    first = ClosureGenerator(seed=7).closure()[0]
    second = ClosureGenerator(seed=7).closure()[0]
    assert first == second


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_generated_closures_are_typed(seed):
    cl, ctx = ClosureGenerator(seed).closure()
    check_closure(ctx, cl)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_generated_closures_agree(seed):
    cl, _ = ClosureGenerator(seed).closure()
    report = agree(cl)
    assert report.agree, report.detail
    assert report.big.outcome == "normal"


class TestProperties:
    def test_static_properties(self, tmp_path):
        suite = PropertySuite(str(tmp_path))
        suite.admissibility()
        suite.conversions()
        suite.store_algebra()
        assert suite.report.failures == []
        assert suite.report.checks["conversion"] > 0

    def test_generated_run(self, tmp_path):
        report = run_suite(str(tmp_path), fuzz=15, seed=3)
        assert report.ok, report.failures
        assert report.checks["subject-reduction"] == 15
        assert report.checks["agreement"] == 15

    def test_corpus_agreement(self, corpus_dir):
        suite = PropertySuite(str(corpus_dir))
        suite.agreement()
        assert suite.report.failures == []
