"""Run-configuration parsing and validation."""

import math

import pytest
import yaml

from warranty2d.config import (CostSpec, DatasetSpec, load_run_config,
                               resolve_config)
from warranty2d.errors import ConfigError, InvalidParameterError


def test_minimal_config_defaults():
    cfg = resolve_config({"dataset": {"builtin": "locomotive"}})
    assert cfg.dataset.builtin == "locomotive"
    assert cfg.censoring.t0 == math.inf and cfg.censoring.u0 == math.inf
    assert cfg.censor_mode == "window"
    assert cfg.prior.source == "elicit"
    assert cfg.mcmc.n_iter == 50_000 and cfg.mcmc.burn_in == 10_000
    assert cfg.cost.q_star == 0.75 and cfg.cost.frw_quantile == 0.1
    assert cfg.optimizer.n_restarts == 16 and cfg.optimizer.thin == 256
    assert cfg.out == "out" and cfg.chain_path is None


def test_dataset_spec_validation():
    with pytest.raises(ConfigError):
        DatasetSpec()
    with pytest.raises(ConfigError):
        DatasetSpec(path="x.csv", builtin="starter")
    with pytest.raises(ConfigError):
        DatasetSpec(builtin="turbine")
    with pytest.raises(ConfigError):
        DatasetSpec(path="x.csv", scale_factor=0.0)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="top-level"):
        resolve_config({"dataset": {"builtin": "starter"}, "buget": {}})
    with pytest.raises(ConfigError, match="unknown keys in cost"):
        resolve_config({"dataset": {"builtin": "starter"},
                        "cost": {"warranty_budget": 3}})
    with pytest.raises(ConfigError, match="dataset"):
        resolve_config({})
    with pytest.raises(ConfigError):
        resolve_config("not a mapping")


def test_censor_mode_validation():
    with pytest.raises(ConfigError, match="censor_mode"):
        resolve_config({"dataset": {"builtin": "starter"},
                        "censor_mode": "both"})
    cfg = resolve_config({"dataset": {"builtin": "starter"},
                          "censor_mode": "corner"})
    assert cfg.censor_mode == "corner"


def test_cost_derived_exclusions():
    with pytest.raises(ConfigError, match="a2"):
        CostSpec(a2=10.95, t_w=0.2)
    with pytest.raises(ConfigError, match="a3"):
        CostSpec(a3=27.91, u_w=0.08)
    with pytest.raises(ConfigError, match="frw_quantile"):
        CostSpec(frw_quantile=0.5)
    assert CostSpec(a2=10.95, u_w=0.08).a2 == 10.95


def test_prior_spec_validation():
    base = {"dataset": {"builtin": "starter"}}
    with pytest.raises(ConfigError, match="explicit"):
        resolve_config({**base, "prior": {"source": "explicit",
                                          "a": [1, 1, 1, 1, 1]}})
    with pytest.raises(ConfigError, match="elicited"):
        resolve_config({**base, "prior": {"a": [1, 1, 1, 1, 1],
                                          "b": [1, 1, 1, 1, 1]}})
    with pytest.raises(ConfigError, match="source"):
        resolve_config({**base, "prior": {"source": "flat"}})
    cfg = resolve_config({**base, "prior": {"source": "explicit",
                                            "a": [1, 1, 1, 1, 1],
                                            "b": [2, 2, 2, 2, 2]}})
    assert cfg.prior.a == (1, 1, 1, 1, 1)


def test_mcmc_section_validated():
    with pytest.raises(InvalidParameterError):
        resolve_config({"dataset": {"builtin": "starter"},
                        "mcmc": {"n_iter": 100, "burn_in": 200}})


def test_optimizer_init_length():
    with pytest.raises(ConfigError, match="4 thresholds"):
        resolve_config({"dataset": {"builtin": "starter"},
                        "optimizer": {"init": [0.1, 0.2]}})


def test_censoring_null_means_uncensored():
    cfg = resolve_config({"dataset": {"builtin": "starter"},
                          "censoring": {"t0": None, "u0": None}})
    assert cfg.censoring.t0 == math.inf
    with pytest.raises(ConfigError):
        resolve_config({"dataset": {"builtin": "starter"},
                        "censoring": {"t0": -1.0}})


def test_load_run_config_paths(tmp_path):
    data = tmp_path / "pairs.csv"
    data.write_text("age,usage\n1.0,2.0\n")
    cfg_file = tmp_path / "run.yaml"
    cfg_file.write_text(yaml.safe_dump(
        {"dataset": {"path": "pairs.csv"}, "out": "results"}))
    cfg = load_run_config(cfg_file)
    # relative dataset paths resolve against the config file
    assert cfg.dataset.path == str(data)
    with pytest.raises(FileNotFoundError):
        load_run_config(tmp_path / "missing.yaml")
    cfg_file.write_text("dataset: {path: nowhere.csv}\n")
    with pytest.raises(FileNotFoundError, match="nowhere"):
        load_run_config(cfg_file)
    cfg_file.write_text("dataset: [broken\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_run_config(cfg_file)


def test_load_run_config_chain_path(tmp_path):
    cfg_file = tmp_path / "run.yaml"
    cfg_file.write_text(yaml.safe_dump(
        {"dataset": {"builtin": "starter"}, "chain_path": "chain.csv"}))
    with pytest.raises(FileNotFoundError, match="chain"):
        load_run_config(cfg_file)
    (tmp_path / "chain.csv").write_text("eta_t,lambda_t,eta_u,lambda_u,theta\n")
    cfg = load_run_config(cfg_file)
    assert cfg.chain_path == str(tmp_path / "chain.csv")
