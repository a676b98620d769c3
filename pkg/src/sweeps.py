"""
Parameter Sweeps
Grid and random sweeps over (u, v, alpha) with multiprocessing support
"""
import time
from itertools import product
from multiprocessing import Pool, cpu_count
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import get_config
from src.errors import ArgumentError, NumericalError, ToolkitError
from src.utils import get_logger, parse_complex, random_complex

logger = get_logger(__name__)

# Global variables for multiprocessing worker initialization
_worker_task = None
_worker_shared = None


def _worker_init(task: Callable, shared: Any):
    """Initialize worker process with the task and its shared inputs"""
    global _worker_task, _worker_shared
    _worker_task = task
    _worker_shared = shared


def _evaluate_point(point: Dict) -> Tuple[Optional[Any], Optional[Dict]]:
    """
    Evaluate one sweep point

    Returns:
    --------
    Tuple of (result, diagnostic); exactly one of them is None
    """
    global _worker_task, _worker_shared
    try:
        return _worker_task(_worker_shared, point), None
    except ToolkitError as e:
        return None, {
            'point': point,
            'why': type(e).__name__,
            'numerical': isinstance(e, NumericalError),
            'error': str(e),
        }


def sweep_points(sweep: Optional[Dict], rng: np.random.Generator,
                 defaults: Optional[Dict] = None, radius: float = 1.0) -> List[Dict]:
    """
    Expand a sweep section into an ordered list of points

    Grid values (lists under 'u', 'v', 'alpha') are combined as a cartesian
    product; 'random_points' adds that many points drawn from the complex disc.
    Keys missing from the grid take their value from defaults.
    """
    sweep = sweep or {}
    defaults = dict(defaults or {})
    keys = [k for k in ('u', 'v', 'alpha') if sweep.get(k)]

    points = []
    if keys:
        grids = [[parse_complex(x) for x in sweep[k]] for k in keys]
        for combo in product(*grids):
            point = dict(defaults)
            point.update(dict(zip(keys, combo)))
            points.append(point)

    n_random = int(sweep.get('random_points', 0) or 0)
    for _ in range(n_random):
        point = dict(defaults)
        for k in ('u', 'v'):
            point[k] = complex(random_complex(rng, None, radius))
        if 'alpha' in sweep.get('randomize', []):
            point['alpha'] = complex(random_complex(rng, None, radius))
        points.append(point)

    return points


def run_sweep(task: Callable[[Any, Dict], Any], shared: Any, points: Sequence[Dict],
              use_multiprocessing: Optional[bool] = None) -> List[Any]:
    """
    Evaluate task(shared, point) for every point, results in point order

    Raises:
    -------
    NumericalError or ArgumentError carrying the first failing point
    """
    points = list(points)
    if not points:
        return []

    params = get_config().get_parallel_params()
    if use_multiprocessing is None:
        use_multiprocessing = params.get('use_multiprocessing', True)
    if len(points) < int(params.get('min_tasks', 16)):
        use_multiprocessing = False

    start_time = time.time()
    if use_multiprocessing:
        num_processes = params.get('num_processes') or cpu_count()
        chunk_size = int(params.get('chunk_size', 4))
        logger.info(f"Using multiprocessing with {num_processes} processes for {len(points)} points")
        with Pool(processes=num_processes, initializer=_worker_init, initargs=(task, shared)) as pool:
            outcomes = pool.map(_evaluate_point, points, chunksize=chunk_size)
    else:
        logger.debug(f"Evaluating {len(points)} points sequentially")
        _worker_init(task, shared)
        outcomes = [_evaluate_point(p) for p in points]

    results = []
    for result, diag in outcomes:
        if diag is not None:
            message = f"Sweep point {diag['point']} failed: {diag['error']}"
            if diag['numerical']:
                raise NumericalError(message, diag)
            raise ArgumentError(message)
        results.append(result)

    logger.debug(f"Sweep of {len(points)} points took {time.time() - start_time:.2f}s")
    return results
