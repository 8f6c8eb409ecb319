# services - Orchestration layer between the numeric modules and the CLI
from services import (
    report_service,
    verification_service,
)

__all__ = [
    "report_service",
    "verification_service",
]
