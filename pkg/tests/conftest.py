"""Shared fixtures. Expensive phantom runs are session-scoped: the suite
builds each mesh or measurement once and every test reads it immutably."""

import numpy as np
import pytest

from porewet.config import PipelineConfig
from porewet.meshing import extract_isosurface
from porewet.pipeline import measure_volume
from porewet.validate import validation_config
from porewet.volume import (
    SOLID,
    PhantomSpec,
    gen_flat_droplet,
    gen_grain_droplet,
    gen_solid_sphere,
)


def flat_volume(radius: float, theta: float):
    spec = PhantomSpec(kind="flat", droplet_radius=radius, target_angle=theta)
    return gen_flat_droplet(spec)


@pytest.fixture(scope="session")
def val_config():
    # Phantom measurement context: no small-cluster floor, no figure output.
    return validation_config(PipelineConfig())


@pytest.fixture(scope="session")
def theta90_r28_volume():
    return flat_volume(28, 90.0)


@pytest.fixture(scope="session")
def theta90_r28_result(theta90_r28_volume, val_config):
    return measure_volume(theta90_r28_volume, val_config)


@pytest.fixture(scope="session")
def theta60_r14_result(val_config):
    return measure_volume(flat_volume(14, 60.0), val_config)


@pytest.fixture(scope="session")
def grain_d48():
    spec = PhantomSpec(kind="grain", droplet_radius=20, grain_radius=40,
                       center_separation=48.0)
    return gen_grain_droplet(spec)


@pytest.fixture(scope="session")
def sphere_mesh_r6():
    return extract_isosurface(gen_solid_sphere(6), SOLID)


@pytest.fixture(scope="session")
def sphere_mesh_r28():
    return extract_isosurface(gen_solid_sphere(28), SOLID)


@pytest.fixture(scope="session")
def sphere_mesh_r50():
    return extract_isosurface(gen_solid_sphere(50), SOLID)
