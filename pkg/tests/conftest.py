# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import os

import pytest

from crashblame.corpus import Corpus, CrashRecord, GeneratorConfig, generate_synthetic
from crashblame.nn.config import TrainConfig

here = os.path.abspath(os.path.dirname(__file__))
examples_dir = os.path.join(here, "examples")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("CRASHBLAME_ACCEPTANCE") == "1":
        return
    skip = pytest.mark.skip(reason="set CRASHBLAME_ACCEPTANCE=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def make_record(frames, blame_index=0, problem_class="NULL_POINTER_READ", app="msedge", ts=0):
    return CrashRecord.from_frames(
        frames, problem_class=problem_class, app=app, timestamp=ts, blame_index=blame_index
    )


@pytest.fixture(scope="session")
def small_corpus():
    return generate_synthetic(GeneratorConfig(records=400, seed=3))


@pytest.fixture
def tiny_config():
    return TrainConfig(
        hidden_size=6,
        max_epochs=2,
        patience=2,
        batch_size=16,
        tfidf_dim=12,
        learning_rate=0.01,
        seed=1,
    )


@pytest.fixture
def sample_corpus():
    """
    A handful of hand-written stacks in the shape of real crashes.
    """
    records = [
        make_record(
            [
                "igd10iumd64.dll!OpenAdapter10_2+0x1a2b",
                "d3d11.dll!NDXGI::CDevice::RotateResourceIdentities",
                "dxgi.dll!CDXGISwapChain::PresentImplCore",
                "msedge.dll!gl::GLSurfaceEGL::SwapBuffers",
                "kernel32.dll!BaseThreadInitThunk",
            ],
            blame_index=0,
            ts=10,
        ),
        make_record(
            [
                "msedge_elf.dll!crash_reporter::DumpWithoutCrashing",
                "msedge.dll!viz::GLOutputSurface::SwapBuffers",
                "msedge.dll!gpu::CommandBufferStub::OnAsyncFlush",
                "ntdll.dll!RtlUserThreadStart",
            ],
            blame_index=1,
            ts=20,
        ),
        make_record(
            [
                "ntdll.dll!RtlReportCriticalFailure",
                "ntdll.dll!RtlpHeapHandleError",
                "excel.exe!CopyMemoryBlock+0x40",
                "excel.exe!RecalcSheet",
            ],
            blame_index=2,
            problem_class="HEAP_CORRUPTION",
            app="excel",
            ts=30,
        ),
        make_record(
            ["outlook.exe!ReadFileChunk", "outlook.exe!SyncFolder"],
            blame_index=0,
            problem_class="INVALID_POINTER_READ",
            app="outlook",
            ts=40,
        ),
    ]
    return Corpus(records=records, source="samples")
