from .bridge import FinalMetrics, TraineeAdapter, serve

__all__ = ["FinalMetrics", "TraineeAdapter", "serve"]
__version__ = "0.1.0"
