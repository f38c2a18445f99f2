import glob
import importlib.util
import os
import sys

# When run from ctest, load the package built in the CMake tree, even if an
# installed copy would otherwise take precedence.
_pkg_dir = os.environ.get("GDVALIGN_EXPECT_DIR")
if _pkg_dir:

    def _load(name, path, search=None):
        spec = importlib.util.spec_from_file_location(name, path, submodule_search_locations=search)
        module = importlib.util.module_from_spec(spec)
        sys.modules[name] = module
        spec.loader.exec_module(module)
        return module

    (_ext,) = glob.glob(os.path.join(_pkg_dir, "_core*.so"))
    _load("gdvalign._core", _ext)
    _load("gdvalign", os.path.join(_pkg_dir, "__init__.py"), [_pkg_dir])
    assert os.path.dirname(sys.modules["gdvalign._core"].__file__) == _pkg_dir
