from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

core_sources = [
    "src/crc32c.cpp",
    "src/scl_frame.cpp",
    "src/endpoint.cpp",
    "src/channel.cpp",
    "src/pss.cpp",
    "src/safe_io.cpp",
    "src/jitter.cpp",
    "src/scenario.cpp",
    "src/simulator.cpp",
    "src/sim_cli.cpp",
    "src/jitter_cli.cpp",
]

setup(
    ext_modules=[
        Pybind11Extension(
            "safesim._safesim",
            sources=core_sources + ["bindings/module.cpp"],
            include_dirs=["include", "vendor"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
