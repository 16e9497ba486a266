"""Shared fixtures: one cached run per shipped configuration."""

import os

import pytest

from fraclab.config import load_config
from fraclab import runner

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def config_path(name: str) -> str:
    return os.path.abspath(os.path.join(CONFIG_DIR, name + ".cfg"))


def _run(name: str, tmp_path_factory):
    cfg = load_config(config_path(name))
    out = str(tmp_path_factory.mktemp("run_" + name))
    manifest, code = runner.run(cfg, out)
    return {"name": name, "cfg": cfg, "dir": out,
            "manifest": manifest, "exit": code}


@pytest.fixture(scope="session")
def pn_layer_run(tmp_path_factory):
    return _run("pn_layer_s05", tmp_path_factory)


@pytest.fixture(scope="session")
def layer_s025_run(tmp_path_factory):
    return _run("layer_s025", tmp_path_factory)


@pytest.fixture(scope="session")
def layer_s05_scan_run(tmp_path_factory):
    return _run("layer_s05_scan", tmp_path_factory)


@pytest.fixture(scope="session")
def layer_s075_run(tmp_path_factory):
    return _run("layer_s075", tmp_path_factory)


@pytest.fixture(scope="session")
def radial_run(tmp_path_factory):
    return _run("radial_n2_s05", tmp_path_factory)


@pytest.fixture(scope="session")
def coupled_run(tmp_path_factory):
    return _run("coupled_m2_orientable", tmp_path_factory)


@pytest.fixture(scope="session")
def symmetry_run(tmp_path_factory):
    return _run("symmetry_n2", tmp_path_factory)
