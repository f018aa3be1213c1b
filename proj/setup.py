"""Builds the _segcurate extension through the project's CMake tree."""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)
        config = "Debug" if self.debug else "Release"
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                f"-DCMAKE_BUILD_TYPE={config}",
                "-DSEGCURATE_BUILD_PYTHON=ON",
                "-DSEGCURATE_BUILD_TESTS=OFF",
                "-DSEGCURATE_BUILD_CLI=OFF",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_segcurate", "-j"],
            check=True,
        )
        built = sorted((build_dir / "python").glob("_segcurate.*"))
        if not built:
            raise RuntimeError("cmake did not produce the _segcurate module")
        target = Path(self.get_ext_fullpath(ext.name))
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[0], target)


setup(
    packages=["segcurate"],
    package_dir={"segcurate": "python/segcurate"},
    ext_modules=[CMakeExtension("segcurate._segcurate")],
    cmdclass={"build_ext": CMakeBuild},
)
