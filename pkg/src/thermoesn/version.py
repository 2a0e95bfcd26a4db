"""Single source of the package version string."""

VERSION = "0.1.0"
