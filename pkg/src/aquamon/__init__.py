"""Water-quality sensing data platform.

Ingests lab, sensor, and field-app measurements, stores them in an embedded
crash-safe log store, reconciles multi-agency safety ranges into purpose
profiles, and serves assessments and time series over HTTP and a CLI.
"""

__version__ = "0.1.0"
