from .exact_algebra import APoly, BiSeries, LoopMatrix, ZLoop
from .exceptions import TtStarError

__all__ = ['APoly', 'BiSeries', 'LoopMatrix', 'ZLoop', 'TtStarError']
