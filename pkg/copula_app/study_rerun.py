"""Optional rerun recording of grids, tail curves and bootstrap statistics."""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import rerun as rr

from copula_app.copulas import TailCurve
from copula_app.study import StudyReport


class StudyRerun:
    """Writes study artifacts into a .rrd recording for the rerun viewer."""

    def __init__(self, name: str, path: str | Path):
        self.name = name
        self.path = Path(path)
        self.initialized = False

    def init(self):
        logging.info(f"StudyRerun // Recording {self.name} to {self.path}")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        rr.init(self.name, spawn=False)
        rr.save(str(self.path))
        self.initialized = True

    def _require_init(self):
        if not self.initialized:
            logging.warning(f"StudyRerun // Not initialized, initializing {self.name}")
            self.init()

    def log_dict(self, path: str, obj: Any):
        self._require_init()
        try:
            def default_converter(o):
                if isinstance(o, np.ndarray):
                    return o.tolist()
                if hasattr(o, "__dict__"):
                    return o.__dict__
                return str(o)

            pretty_json = json.dumps(obj, default=default_converter, indent=2)
            rr.log(path, rr.TextDocument(f"```json\n{pretty_json}\n```", media_type=rr.MediaType.MARKDOWN))
        except Exception as e:
            logging.error(f"StudyRerun // Error logging dict to {path}: {e}", exc_info=True)

    def log_surface(self, path: str, u: np.ndarray, v: np.ndarray, values: np.ndarray):
        """A copula or density surface as (u, v, value) points."""
        self._require_init()
        rr.log(path, rr.Points3D(np.column_stack([u, v, values]), radii=0.005))

    def log_tail_curve(self, path: str, curve: TailCurve):
        self._require_init()
        order = np.argsort(curve.t)
        for i, idx in enumerate(order):
            rr.set_time("tail_index", sequence=i)
            rr.log(f"{path}/lambda_u_t", rr.Scalars(float(curve.values[idx])))
            rr.log(f"{path}/log10_t", rr.Scalars(float(np.log10(curve.t[idx]))))
        rr.log(f"{path}/verdict", rr.TextLog(f"verdict={curve.verdict}", level=rr.TextLogLevel.INFO))

    def log_bootstrap(self, report: StudyReport, bins: int = 40):
        """Histogram of each family's bootstrap statistics, observed value as text."""
        self._require_init()
        for g in report.gof_reports:
            if g.bootstrap_statistics.size == 0:
                continue
            counts, _ = np.histogram(g.bootstrap_statistics, bins=bins)
            rr.log(f"gof/{g.family}/bootstrap", rr.BarChart(counts))
            rr.log(
                f"gof/{g.family}/observed",
                rr.TextLog(f"statistic={g.observed_statistic:.6g} p={g.p_value:.6g}", level=rr.TextLogLevel.INFO),
            )

    def close(self):
        if self.initialized:
            rr.disconnect()
            self.initialized = False
