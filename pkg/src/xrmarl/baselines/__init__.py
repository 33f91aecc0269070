from .aps import ApsConfig, ApsController, aps_step

__all__ = ["ApsConfig", "ApsController", "aps_step"]
