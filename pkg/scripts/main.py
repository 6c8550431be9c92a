#!/usr/bin/env python3
"""
Main entry point for the tt* toolkit
"""

import os
import sys
import logging

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import get_config  # noqa: E402
from app.cli import dispatch  # noqa: E402

logging.basicConfig(
    level=getattr(logging, get_config().LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def main():
    """Run one subcommand and exit with its code"""
    try:
        code = dispatch(sys.argv[1:])
    except KeyboardInterrupt:
        logger.info("🛑 Interrupted")
        code = 130
    except Exception as e:
        logger.error(f"❌ Unexpected failure: {e}")
        code = 1
    sys.exit(code)


if __name__ == '__main__':
    main()
