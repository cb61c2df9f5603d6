import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name, sourcedir=""):
        super().__init__(name, sources=[])
        self.sourcedir = os.fspath(Path(sourcedir).resolve())


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        cfg = "Debug" if int(os.environ.get("DEBUG", "0")) else "Release"
        args = [
            f"-DPython3_EXECUTABLE={sys.executable}",
            f"-DCMAKE_BUILD_TYPE={cfg}",
            "-DMDPLEARN_BUILD_TESTS=OFF",
            "-DMDPLEARN_BUILD_CLI=OFF",
        ]
        build_temp = Path(self.build_temp) / ext.name
        build_temp.mkdir(parents=True, exist_ok=True)
        subprocess.run(["cmake", ext.sourcedir, *args], cwd=build_temp, check=True)
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_core", f"-j{os.cpu_count()}"],
            cwd=build_temp,
            check=True,
        )
        built = list((build_temp / "python" / "mdplearn").glob("_core.*"))
        if len(built) != 1:
            raise RuntimeError(f"expected one built extension, found {built}")
        dest = Path.cwd() / self.get_ext_fullpath(ext.name)
        dest.parent.mkdir(parents=True, exist_ok=True)
        self.copy_file(built[0], dest)


setup(
    ext_modules=[CMakeExtension("mdplearn._core")],
    cmdclass={"build_ext": CMakeBuild},
)
