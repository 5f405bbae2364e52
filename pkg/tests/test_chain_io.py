"""
Tests for the chain CSV, JSON and loss-grid file formats.
"""

import json

import numpy as np
import pytest

from src.models import LossGrid, LossKind
from src.models.calibration_models import NA_AXIS, NB_AXIS, S1_AXIS, S2_AXIS
from src.models.errors import ChainFileError
from src.sampling.sampler import run_chain, summarize_run
from src.utils.chain_io import (
    read_chain_csv,
    read_loss_grid,
    read_metadata,
    read_states,
    write_chain_csv,
    write_json,
    write_loss_grid,
)


@pytest.fixture
def chain(comb_chain_config):
    return run_chain(comb_chain_config.model_copy(update={"n_iterations": 300}))


class TestChainCsv:
    def test_round_trip_is_exact(self, chain, tmp_path):
        path = write_chain_csv(chain, tmp_path / "chain.csv", "abc123")
        restored, metadata = read_chain_csv(path)
        np.testing.assert_array_equal(restored.states, chain.states)
        np.testing.assert_array_equal(restored.accepted, chain.accepted)
        np.testing.assert_array_equal(restored.dr_stage, chain.dr_stage)
        np.testing.assert_array_equal(restored.target_evals, chain.target_evals)
        assert restored.proposal_kinds.tolist() == chain.proposal_kinds.tolist()
        assert metadata == {"schema_version": "1", "config_hash": "abc123"}

    def test_layout(self, chain, tmp_path):
        path = write_chain_csv(chain, tmp_path / "chain.csv", "abc123")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# schema_version=1 config_hash=abc123"
        assert lines[1] == "iteration,x0,accepted,dr_stage,target_evals,proposal"
        assert lines[2] == "0,0,,,0,init"
        assert len(lines) == chain.n_iterations + 3

    def test_accepted_dr_stage_is_written(self, chain, tmp_path):
        restored, _ = read_chain_csv(write_chain_csv(chain, tmp_path / "c.csv", "h"))
        record = next(
            (restored.record(i) for i in range(restored.n_iterations) if restored.dr_stage[i]),
            None,
        )
        if record is not None:
            assert record.proposal.value == "dr"
            assert record.accepted

    def test_creates_parent_directories(self, chain, tmp_path):
        path = write_chain_csv(chain, tmp_path / "nested" / "deeper" / "chain.csv", "h")
        assert path.exists()
        assert not list(path.parent.glob("*.tmp"))

    def test_metadata_absent(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("x0\n1.0\n2.0\n", encoding="utf-8")
        assert read_metadata(path) == {}


class TestReadStates:
    def test_any_csv_with_state_columns(self, tmp_path):
        path = tmp_path / "states.csv"
        path.write_text("x1,note,x0\n1.5,a,0.5\n2.5,b,-0.5\n", encoding="utf-8")
        np.testing.assert_array_equal(read_states(path), [[0.5, 1.5], [-0.5, 2.5]])

    def test_reads_chain_files(self, chain, tmp_path):
        path = write_chain_csv(chain, tmp_path / "chain.csv", "h")
        np.testing.assert_array_equal(read_states(path), chain.states)

    @pytest.mark.parametrize(
        "text",
        [
            "iteration,value\n0,1.0\n",
            "x0\nabc\n1.0\n",
            "x0,x1\n1.0,\n",
            "",
        ],
    )
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "bad.csv"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ChainFileError):
            read_states(path)

    def test_chain_reader_needs_bookkeeping(self, tmp_path):
        path = tmp_path / "states.csv"
        path.write_text("x0\n1.0\n2.0\n", encoding="utf-8")
        with pytest.raises(ChainFileError):
            read_chain_csv(path)


class TestJsonAndGrids:
    def test_summary_json(self, chain, comb_chain_config, tmp_path):
        config = comb_chain_config.model_copy(update={"n_iterations": 300})
        path = write_json(summarize_run(chain, config), tmp_path / "summary.json")
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["schema_version"] == 1
        assert payload["seed"] == config.seed
        assert payload["mode"] == "delayed_rejection"
        assert payload["total_target_evals"] == chain.total_target_evals

    def test_dict_json_is_sorted(self, tmp_path):
        path = write_json({"b": 1, "a": 2}, tmp_path / "d.json")
        assert list(json.loads(path.read_text(encoding="utf-8"))) == ["a", "b"]

    def test_loss_grid_round_trip(self, tmp_path):
        grid = LossGrid(
            kind=LossKind.AP,
            axes={S1_AXIS: (0.15,), S2_AXIS: (0.04, 0.15), NA_AXIS: (0.1, 0.3), NB_AXIS: (0.9,)},
            values=np.array([-0.1234567890123, -2.5, -1.0 / 3.0, -7.0]).reshape(1, 2, 2, 1),
            stderr=np.array([1e-3, 2e-3, 3e-3, 4e-3]).reshape(1, 2, 2, 1),
            mc_samples=20_000,
        )
        path = write_loss_grid(grid, tmp_path / "ap_grid.csv", "feed")
        sidecar = json.loads((tmp_path / "ap_grid.json").read_text(encoding="utf-8"))
        assert sidecar == {
            "schema_version": 1,
            "kind": "ap",
            "mc_samples": 20_000,
            "config_hash": "feed",
        }
        restored = read_loss_grid(path)
        assert restored.axes == grid.axes
        np.testing.assert_array_equal(restored.values, grid.values)
        np.testing.assert_array_equal(restored.stderr, grid.stderr)
        assert restored.mc_samples == 20_000
