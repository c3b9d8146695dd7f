"""
Unit tests for the command-line front end.
"""

import json

import pytest

from clubforge import __version__
from clubforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured


def result_of(captured):
    lines = [line for line in captured.out.splitlines() if line.strip()]
    return json.loads(lines[-1])


def error_of(captured):
    lines = [line for line in captured.err.splitlines() if line.strip()]
    return json.loads(lines[-1])


@pytest.fixture
def trace_club_file(tmp_path, capsys):
    path = tmp_path / 'trace.json'
    code, _ = run(capsys, '--output', str(path), 'construct', 'trace-club', '--m', '3')
    assert code == 0
    return path


class TestConstruct:
    """Test cases for the construct subcommand."""

    def test_trace_club(self, capsys):
        """Test the document layout."""
        code, captured = run(capsys, 'construct', 'trace-club', '--m', '3')
        assert code == 0
        doc = result_of(captured)
        assert doc['metadata']['command'] == 'construct'
        assert doc['metadata']['version'] == __version__
        assert doc['result']['subspace']['k'] == 2
        assert doc['result']['report']['passed']

    def test_cone_with_s_mode(self, capsys):
        """Test an explicit S basis."""
        code, captured = run(capsys, 'construct', 'cone', '--m', '4', '--k', '3',
                             '--s-mode', 'ExplicitBasis', '--s-data', '1,2')
        assert code == 0
        report = result_of(captured)['result']['report']
        assert report['measured']['classification']['index'] == 2

    def test_unknown_construction(self, capsys):
        """Test exit code 2 for an unknown name."""
        code, captured = run(capsys, 'construct', 'hyperoval', '--m', '3')
        assert code == 2
        assert error_of(captured)['error'] == 'ValidationError'

    def test_bad_params_json(self, capsys):
        """Test that malformed --params is a parse error."""
        code, captured = run(capsys, 'construct', 'trace-club', '--m', '3', '--params', '{')
        assert code == 2
        assert error_of(captured)['error'] == 'ParseError'


class TestAnalyzeAndDual:
    """Test cases for analyze and dual."""

    def test_analyze_output_file(self, capsys, trace_club_file):
        """Test analyzing a construct document written with --output."""
        code, captured = run(capsys, 'analyze', str(trace_club_file), '--hyperplanes')
        assert code == 0
        result = result_of(captured)['result']
        assert result['size'] == 5
        assert result['census'] == [[1, 4], [2, 1]]
        assert result['classification']['kind'] == 'Club'
        assert sum(c for _, c in result['hyperplane_spectrum']) == 9

    def test_compare(self, capsys, trace_club_file):
        """Test comparing a set with itself."""
        code, captured = run(capsys, 'analyze', str(trace_club_file),
                             '--compare', str(trace_club_file))
        assert code == 0
        assert result_of(captured)['result']['verdict'] == 'Indistinguishable'

    def test_zero_subspace(self, capsys, tmp_path):
        """Test that the empty linear set is a validation error."""
        path = tmp_path / 'zero.json'
        path.write_text(json.dumps({'field': {'p': 2, 'e': 1, 'm': 3}, 'k': 2, 'basis': []}))
        code, captured = run(capsys, 'analyze', str(path))
        assert code == 2
        assert error_of(captured)['error'] == 'ValidationError'

    def test_missing_file(self, capsys, tmp_path):
        """Test that an unreadable file is a parse error."""
        code, captured = run(capsys, 'analyze', str(tmp_path / 'absent.json'))
        assert code == 2
        assert error_of(captured)['error'] == 'ParseError'

    def test_invalid_json(self, capsys, tmp_path):
        """Test that malformed JSON is a parse error."""
        path = tmp_path / 'broken.json'
        path.write_text('{"field": ')
        code, captured = run(capsys, 'analyze', str(path))
        assert code == 2
        assert error_of(captured)['error'] == 'ParseError'

    def test_dual(self, capsys, trace_club_file):
        """Test the trace dual rank."""
        code, captured = run(capsys, 'dual', str(trace_club_file))
        assert code == 0
        assert len(result_of(captured)['result']['basis']) == 3


class TestCode:
    """Test cases for the code subcommand."""

    @pytest.fixture
    def dual_file(self, tmp_path, capsys, trace_club_file):
        path = tmp_path / 'dual.json'
        code, _ = run(capsys, '--output', str(path), 'dual', str(trace_club_file))
        assert code == 0
        return path

    def test_weights(self, capsys, dual_file):
        """Test the distribution and tag of the trace-club dual code."""
        code, captured = run(capsys, 'code', 'weights', str(dual_file))
        assert code == 0
        result = result_of(captured)['result']
        assert result['A'] == [1, 7, 28, 28]
        assert result['d'] == 1
        assert not result['mrd']
        assert result['classification']['tag'] == 'DualOfClub'

    def test_geometric(self, capsys, dual_file):
        """Test the geometric method."""
        code, captured = run(capsys, 'code', 'weights', str(dual_file), '--method', 'geometric')
        assert code == 0
        assert result_of(captured)['result']['A'] == [1, 7, 28, 28]

    def test_build_and_dual(self, capsys, dual_file, tmp_path):
        """Test building a generator and taking its dual."""
        path = tmp_path / 'code.json'
        code, captured = run(capsys, '--output', str(path), 'code', 'build', str(dual_file))
        assert code == 0
        assert result_of(captured)['result']['n'] == 3
        code, captured = run(capsys, 'code', 'dual', str(path))
        assert code == 0
        assert result_of(captured)['result']['k'] == 1

    def test_degenerate_system(self, capsys, tmp_path):
        """Test that a non-spanning system is refused."""
        path = tmp_path / 'line.json'
        path.write_text(json.dumps({'field': {'p': 2, 'e': 1, 'm': 3}, 'k': 2,
                                    'basis': [[1, 0]]}))
        code, captured = run(capsys, 'code', 'weights', str(path))
        assert code == 2
        assert error_of(captured)['error'] == 'DegenerateSystemError'


class TestFormulas:
    """Test cases for macwilliams and bounds."""

    def test_macwilliams(self, capsys):
        """Test the transform of the [5, 3] code over F_16."""
        code, captured = run(capsys, 'macwilliams', '--A', '1,15,0,1800,2280',
                             '--n', '5', '--k', '3', '--m', '4', '--q', '2')
        assert code == 0
        result = result_of(captured)['result']
        assert result['B'][:3] == [1, 0, 0]
        assert sum(result['B']) == 256
        assert result['dual'] == {'n': 5, 'k': 2}

    def test_macwilliams_input_file(self, capsys, tmp_path):
        """Test reading the distribution from a file."""
        path = tmp_path / 'dist.json'
        path.write_text(json.dumps({'A': [1, 0, 49, 14], 'n': 3, 'k': 2, 'm': 3, 'q': 2}))
        code, captured = run(capsys, 'macwilliams', '--input', str(path))
        assert code == 0
        assert result_of(captured)['result']['B'] == [1, 0, 0, 7]

    def test_macwilliams_invalid(self, capsys):
        """Test that an over-long distribution exits 2."""
        code, captured = run(capsys, 'macwilliams', '--A', '1,2,0,0,5',
                             '--n', '3', '--k', '1', '--m', '3', '--q', '2')
        assert code == 2
        assert error_of(captured)['error'] == 'ValidationError'

    def test_bounds(self, capsys):
        """Test the bound report for the rank-7 3-club."""
        code, captured = run(capsys, 'bounds', '--q', '2', '--m', '4', '--k', '3', '--i', '3',
                             '--n', '7')
        assert code == 0
        result = result_of(captured)['result']
        assert result['bound'] == 7
        assert result['case'] == 'm/2<=i<=m, k>2'
        assert result['genbound'] == 8
        assert result['singleton'] == '9'
        assert result['b2'] == '0'
        assert result['b2_admissible'] is True


class TestSearch:
    """Test cases for the search subcommand."""

    def test_census(self, capsys):
        """Test the census of 2-subspaces of F_4^2."""
        code, captured = run(capsys, '--jobs', '1', 'search', '--m', '2', '--k', '2', '--n', '2')
        assert code == 0
        result = result_of(captured)['result']
        assert result['scanned'] == 35
        assert result['census'] == {'Club(2)': 5, 'Scattered': 30}

    def test_jsonl(self, capsys):
        """Test that hits are streamed before the document."""
        code, captured = run(capsys, '--jobs', '1', 'search', '--m', '2', '--k', '2', '--n', '2',
                             '--target', 'Club(2)', '--jsonl')
        assert code == 0
        lines = [json.loads(line) for line in captured.out.splitlines() if line.strip()]
        assert sum(1 for line in lines if 'hit' in line) == 5
        assert lines[-1]['result']['hits'] == 5

    def test_cross_check(self, capsys):
        """Test the anchored cross-check."""
        code, captured = run(capsys, '--jobs', '1', 'search', '--m', '2', '--k', '2', '--n', '3',
                             '--anchor', '1,2', '--cross-check')
        assert code == 0
        assert result_of(captured)['result']['agree'] is True

    def test_cross_check_needs_anchor(self, capsys):
        """Test that --cross-check without --anchor is refused."""
        code, captured = run(capsys, 'search', '--m', '2', '--k', '2', '--n', '2',
                             '--cross-check')
        assert code == 2

    def test_budget_exit_code(self, capsys):
        """Test exit code 3 when the budget is exceeded."""
        code, captured = run(capsys, '--budget', '10', 'search', '--m', '2', '--k', '2',
                             '--n', '2')
        assert code == 3
        assert error_of(captured)['error'] == 'BudgetExceededError'


class TestVerifyAndParsing:
    """Test cases for verify and argument handling."""

    def test_verify_passes(self, capsys):
        """Test the battery on the trace club."""
        code, captured = run(capsys, 'verify', 'trace-club', '--m', '3')
        assert code == 0
        assert result_of(captured)['result']['passed'] is True

    def test_verify_failure_exit_code(self, capsys):
        """Test exit code 2 when the battery fails."""
        code, captured = run(capsys, 'verify', 'cone', '--m', '4', '--k', '3', '--i', '9')
        assert code == 2
        assert result_of(captured)['result']['passed'] is False

    def test_verify_builds_once(self, capsys, monkeypatch):
        """Test that --max-m1-club reuses the subspace of the battery."""
        import clubforge.checks

        calls = []
        original = clubforge.checks.build

        def counting_build(spec):
            calls.append(spec.name)
            return original(spec)

        monkeypatch.setattr(clubforge.checks, 'build', counting_build)
        code, captured = run(capsys, 'verify', 'trace-club', '--m', '4', '--max-m1-club')
        result = result_of(captured)['result']
        assert calls == ['TraceClub']
        assert result['max_m1_club']['outcomes'][0]['name'] == 'club_shape'
        assert code == 2

    def test_unknown_command(self, capsys):
        """Test that argument errors become parse errors."""
        code, captured = run(capsys, 'frobnicate')
        assert code == 2
        assert error_of(captured)['error'] == 'ParseError'

    def test_version(self, capsys):
        """Test --version."""
        with pytest.raises(SystemExit) as excinfo:
            main(['--version'])
        assert excinfo.value.code == 0
        assert __version__ in capsys.readouterr().out
