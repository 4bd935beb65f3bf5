from importlib.metadata import version

try:
    __version__ = version("algdep")
except:  # NOQA: E722
    __version__ = "0.0.0"
