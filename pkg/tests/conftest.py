import pathlib
import sys

# Allow running pytest from a fresh checkout without an editable install.
_src = pathlib.Path(__file__).resolve().parents[1] / "src"
if str(_src) not in sys.path:
    try:
        import zkdamper  # noqa: F401
    except ImportError:
        sys.path.insert(0, str(_src))
