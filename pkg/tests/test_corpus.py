import pytest

from app.core.parser import RunItem, parse_file
from app.models.syntax import DPair, Refl, numeral
from app.services.corpus import (
    ANY, SUCCESSOR, ac_n, ac_type, check_file, check_source, closures, corpus_files, dc, dc_type,
    extract_choice, extract_dc, hypothesis_type, load, oracle, realizer, resolved_definitions,
)
from app.services.machine import Outcome, answer, run
from app.services.typecheck import typecheck

MACHINES = ["big", "small"]


class TestChoicePrograms:
    def test_countable_choice_checks(self):
        typecheck(ac_n(), ac_type())

    def test_dependent_choice_checks(self):
        typecheck(dc(), dc_type())

    def test_realizers_check(self):
        for relation in (SUCCESSOR, ANY):
            typecheck(realizer(relation), hypothesis_type(relation))


class TestExtraction:
    @pytest.mark.parametrize("machine", MACHINES)
    @pytest.mark.parametrize("n", range(9))
    def test_choice_matches_oracle(self, n, machine):
        report = extract_choice(n, machine=machine)
        assert report.value == oracle(n) == n
        assert report.unfoldings <= n + 1

    @pytest.mark.parametrize("machine", MACHINES)
    @pytest.mark.parametrize("n", [0, 4, 7])
    def test_earlier_indices_are_shared(self, n, machine):
        report = extract_choice(n, machine=machine)
        assert report.unfoldings == n + 1
        assert report.requery_unfoldings == 0

    @pytest.mark.parametrize("machine", MACHINES)
    def test_first_index(self, machine):
        report = extract_choice(0, machine=machine)
        assert report.value == oracle(0) == 0
        assert report.term == "0"

    def test_constant_relation(self):
        h = realizer(ANY)
        assert extract_choice(4, h).value == oracle(4, h) == 0

    @pytest.mark.parametrize("machine", MACHINES)
    @pytest.mark.parametrize("n,x0", [(0, 0), (3, 0), (2, 5)])
    def test_dependent_choice_orbit(self, n, x0, machine):
        report = extract_dc(n, x0, machine=machine)
        assert report.value == x0 + n
        assert report.x0 == x0

    def test_report_fields(self):
        report = extract_choice(2)
        assert report.program == "acn"
        assert report.term == "2"
        assert report.steps > 0

    def test_unknown_machine(self):
        with pytest.raises(ValueError):
            extract_choice(1, machine="medium")


class TestFiles:
    def test_corpus_is_present(self, corpus_dir):
        names = {p.name for p in corpus_files(str(corpus_dir))}
        assert {"ac_n.dlpaw", "dc.dlpaw", "basics.dlpaw"} <= names

    def test_corpus_checks(self, corpus_dir):
        for path in corpus_files(str(corpus_dir)):
            report = check_file(path)
            assert report.ok, [d.error for d in report.definitions if d.status != "ok"]

    def test_corpus_runs_to_answers(self, corpus_dir):
        for path in corpus_files(str(corpus_dir)):
            for cl in closures(load(path)):
                outcome = run(cl)
                assert outcome.kind is Outcome.NORMAL, path.name
                assert answer(outcome.closure) is not None

    def test_choice_answers_from_files(self, corpus_dir):
        results = [answer(run(cl).closure) for cl in closures(load(corpus_dir / "ac_n.dlpaw"))]
        assert results[0] == Refl()
        assert isinstance(results[1], DPair)
        assert results[1].witness == numeral(2)

    def test_failing_definition_does_not_hide_later_ones(self):
        source = parse_file("def bad : 0 = 1 := refl\ndef good : 1 = 1 := refl\ncheck good : 1 = 1\n", inline=False)
        report = check_source(source)
        assert [d.status for d in report.definitions] == ["error", "ok", "ok"]
        assert [d.name for d in report.definitions] == ["bad", "good", "check#2"]
        assert not report.ok

    def test_parse_errors_are_reported(self, tmp_path):
        path = tmp_path / "broken.dlpaw"
        path.write_text("def x : 0 = 0 := (refl\n")
        report = check_file(path)
        assert not report.ok
        assert report.diagnostics

    def test_definitions_are_resolved(self):
        source = parse_file("def a : 0 = 0 := refl\ndef b : 0 = 0 /\\ 0 = 0 := (a, a)\nrun <b | alpha>\n", inline=False)
        assert resolved_definitions(source)["b"] == parse_file("def b : 0 = 0 /\\ 0 = 0 := (refl, refl)").items[0].proof
        assert isinstance(source.items[-1], RunItem)
        assert len(closures(source)) == 1
