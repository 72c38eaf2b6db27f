import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hdpl import fixtures as fx
from hdpl.kripke import model_to_dict


@pytest.fixture(scope="session")
def demo_dir(tmp_path_factory):
    """Model and signature files for CLI tests."""
    d = tmp_path_factory.mktemp("models")
    files = {
        "loop.json": model_to_dict(fx.loop_model()),
        "unrolled.json": model_to_dict(fx.unrolled_model(4)),
        "fork_l.json": model_to_dict(fx.fork_pair()[0].model),
        "fork_r.json": model_to_dict(fx.fork_pair()[1].model),
        "chain3.json": model_to_dict(fx.nominal_chain(3).model),
        "sig_p.json": fx.SIG_P.to_dict(),
        "sig_nom.json": fx.SIG_NOM.to_dict(),
    }
    for name, data in files.items():
        (d / name).write_text(json.dumps(data))
    (d / "finite_orders.txt").write_text(fx.finite_orders_formula())
    return d
