#!/usr/bin/env python3
"""
Main entry point for readability-wmd
"""
import logging
import sys

from readability_wmd.cli import main
from readability_wmd.config import get_log_level

# Configure logging
logging.basicConfig(
    level=get_log_level("-v" in sys.argv or "--verbose" in sys.argv),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

if __name__ == "__main__":
    logger.info(f"Running readability-wmd {' '.join(sys.argv[1:])}")
    sys.exit(main())
