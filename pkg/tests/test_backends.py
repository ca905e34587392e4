import os
import subprocess
import sys

import numpy as np
import pytest

import permlab
from permlab._backend import available_backends, load_backend
from permlab.permanent import permanent_ryser
from permlab.tables import block_permanent_ratio


class TestSelection:
    def test_python_always_available(self):
        assert "python" in available_backends()
        assert load_backend("python").BACKEND == "python"

    def test_default_is_listed(self):
        assert permlab.BACKEND in available_backends()

    def test_unknown(self):
        with pytest.raises(ValueError):
            load_backend("fortran")

    def test_environment_forces_python(self):
        code = "import permlab; print(permlab.BACKEND)"
        env = dict(os.environ, PERMLAB_PURE_PYTHON="1")
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                             check=True)
        assert out.stdout.strip() == "python"


@pytest.mark.skipif(len(available_backends()) < 2, reason="compiled extension not built")
class TestAgreement:
    @pytest.mark.parametrize("n", [1, 3, 9, 14])
    def test_ryser(self, n):
        a = np.random.default_rng(n).uniform(0.0, 2.0, size=(n, n))
        ref = permanent_ryser(a, backend="compiled")
        assert permanent_ryser(a, backend="python") == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("m, n", [(2, 50), (3, 9), (4, 3), (5, 2)])
    def test_tables(self, m, n):
        b = np.random.default_rng(m * n).uniform(0.2, 3.0, size=(m, m))
        ref = block_permanent_ratio(b, n, backend="compiled")
        got = block_permanent_ratio(b, n, backend="python")
        assert got.table_count == ref.table_count
        assert got.log_ratio == pytest.approx(ref.log_ratio, rel=1e-12)
        assert got.argmax_table == ref.argmax_table
