from dialeval.models.config import TrainConfig

__all__ = ["TrainConfig"]
