"""
Tests for ktree_bounds.dump.
"""

import tempfile
from pathlib import Path

import pytest

from ktree_bounds.dump import DUMP_MAGIC, decode_run, dump_run, encode_run, load_run
from ktree_bounds.errors import ParameterError
from ktree_bounds.models import SumMode
from ktree_bounds.params import ProblemParams
from ktree_bounds.solver import generate_lists, run_ktree


class TestRunDump:
    """Test the binary run dump."""

    def setup_method(self):
        """Set up one run."""
        self.params = ProblemParams(m=2**64 - 59, k=4, n=16, mode=SumMode.CENTERED_MOD)
        self.lists = generate_lists(self.params, seed=2)
        self.trace = run_ktree(self.params, self.lists)

    def test_file_contents(self):
        """Test that a written dump reads back the same run."""
        path = Path(tempfile.mkdtemp()) / "runs" / "run.bin"
        dump_run(path, self.params, self.lists, self.trace)
        assert path.read_bytes()[:4] == DUMP_MAGIC
        run = load_run(path)
        assert (run.m, run.k, run.n, run.mode) == (self.params.m, 4, 16, SumMode.CENTERED_MOD)
        assert run.lists.lists == self.lists.lists
        assert run.trace == self.trace

    def test_rejects_corruption(self):
        """Test bad magic and truncated data."""
        data = encode_run(self.params, self.lists, self.trace)
        with pytest.raises(ParameterError):
            decode_run(b"XXXX" + data[4:])
        with pytest.raises(ParameterError):
            decode_run(data[:-3])
        with pytest.raises(ParameterError):
            decode_run(data[:20])
