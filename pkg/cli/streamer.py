"""Console output for HiddenShift commands"""
import sys

from .config import C

_quiet = False


def set_quiet(quiet: bool):
    """Silence emit() (library use, --json output)."""
    global _quiet
    _quiet = quiet


def emit(message=""):
    """Print a message to the console unless quiet"""
    if not _quiet:
        print(message)

def banner(title: str = "HiddenShift — Boolean Hidden Shift Solver"):
    """Print HiddenShift banner"""
    emit(f"\n{C.CYAN}{C.BOLD}{'═'*60}{C.RESET}")
    emit(f"{C.CYAN}{C.BOLD}  {title}{C.RESET}")
    emit(f"{C.CYAN}{C.BOLD}{'═'*60}{C.RESET}\n")

def section(title: str):
    """Print a section header"""
    emit(f"\n{C.BOLD}{C.CYAN}── {title} {'─' * max(0, 45 - len(title))}{C.RESET}")

def check_line(name: str, passed: bool, detail: str):
    """Print one invariant result"""
    icon = f"{C.GREEN}✅ PASS" if passed else f"{C.RED}❌ FAIL"
    emit(f"  {icon}{C.RESET}  {C.BOLD}{name}{C.RESET}")
    emit(f"  {C.GRAY}{detail[:120]}{C.RESET}")

def fail(message: str):
    """Print an error line to stderr, even when quiet"""
    print(f"{C.RED}✗ {message}{C.RESET}", file=sys.stderr)
