"""Desk-scale tele-electrocardiography.

12-lead ECG processing (filter bank, automated delineation, interval and
frontal-axis measurement, IEC-limit evaluation) plus a confidentiality-
preserving tag-value transport protocol with a repository service.
"""

from .model import (
    AxisResult,
    BeatFiducials,
    BeatLabel,
    EcgRecord,
    GlobalMeasurements,
    LeadId,
    QrsType,
    VitalSigns,
    to_microvolts,
    validate_record,
)

__version__ = "0.1.0"

__all__ = [
    "AxisResult",
    "BeatFiducials",
    "BeatLabel",
    "EcgRecord",
    "GlobalMeasurements",
    "LeadId",
    "QrsType",
    "VitalSigns",
    "to_microvolts",
    "validate_record",
    "__version__",
]
