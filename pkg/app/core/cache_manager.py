#!/usr/bin/env python3
"""
Expansion cache for the tt* toolkit
Handles loading and saving of computed metric coefficients F_n
"""

import glob
import os
import re
import time
import logging
from config import Config
from .utils import (
    decode_apoly,
    encode_apoly,
    ensure_directory,
    safe_json_dump,
    safe_json_load,
)

logger = logging.getLogger(__name__)

CACHE_PATTERN = re.compile(r"h_order_(\d+)\.json$")


def validate_cache_data(data):
    """Validate expansion cache structure"""
    if not isinstance(data, dict):
        return False
    if 'order' not in data or 'F' not in data:
        return False
    if not isinstance(data['F'], dict):
        return False
    return len(data['F']) == int(data['order']) + 1


class ExpansionCache:
    def __init__(self, cache_dir=None):
        if cache_dir is None:
            # Use centralized configuration
            Config.ensure_directories()
            self.cache_dir = Config.CACHE_DIR
        else:
            self.cache_dir = os.path.abspath(cache_dir)
        logger.debug(f"📁 Expansion cache directory: {self.cache_dir}")

    def path_for(self, order):
        return os.path.join(self.cache_dir, f"h_order_{order}.json")

    def cached_orders(self):
        orders = []
        for path in glob.glob(os.path.join(self.cache_dir, "h_order_*.json")):
            match = CACHE_PATTERN.search(path)
            if match:
                orders.append(int(match.group(1)))
        return sorted(orders)

    def save_expansion(self, order, coefficients):
        """Save F_0..F_order with write verification"""
        payload = {
            'order': order,
            'last_update': time.time(),
            'F': {str(n): encode_apoly(poly) for n, poly in enumerate(coefficients)},
        }
        try:
            ensure_directory(self.cache_dir)

            if not validate_cache_data(payload):
                logger.error("❌ Invalid expansion cache payload")
                return False

            path = self.path_for(order)
            if safe_json_dump(payload, path, indent=2):
                if self.verify_cache_write(order, coefficients):
                    logger.info(f"✅ Expansion to order {order} cached at {path}")
                    return True
                logger.error("❌ Cache write verification failed")
                return False
            logger.error("❌ Failed to save expansion cache")
            return False

        except Exception as e:
            logger.error(f"❌ Error saving expansion cache: {e}")
            return False

    def load_expansion(self, order):
        """F_0..F_order from the smallest cached expansion that covers it, or None"""
        for cached in self.cached_orders():
            if cached < order:
                continue
            data = safe_json_load(self.path_for(cached))
            if data and validate_cache_data(data):
                logger.info(f"✅ Expansion to order {order} loaded from cache (order {cached})")
                return [decode_apoly(data['F'][str(n)]) for n in range(order + 1)]
            logger.warning(f"❌ Invalid expansion cache at {self.path_for(cached)}")
        return None

    def verify_cache_write(self, order, expected):
        """Verify that the cache file decodes to the coefficients just written"""
        try:
            data = safe_json_load(self.path_for(order))
            if not data or not validate_cache_data(data):
                return False
            written = [decode_apoly(data['F'][str(n)]) for n in range(order + 1)]
            return written == list(expected)
        except Exception as e:
            logger.error(f"❌ Cache verification failed: {e}")
            return False

    def clear_cache(self):
        """Remove every cached expansion; returns the number of files removed"""
        removed = 0
        for order in self.cached_orders():
            try:
                os.remove(self.path_for(order))
                removed += 1
            except OSError as e:
                logger.error(f"❌ Error clearing {self.path_for(order)}: {e}")
        if removed:
            logger.info(f"✅ Cleared {removed} cached expansions")
        else:
            logger.warning(f"⚠️ No cached expansions in {self.cache_dir}")
        return removed

    def get_cache_status(self):
        """Get cache status information"""
        orders = self.cached_orders()
        if not orders:
            return {'status': 'No data', 'orders': [], 'max_order': None, 'age_minutes': 0}

        data = safe_json_load(self.path_for(orders[-1])) or {}
        age_minutes = (time.time() - data.get('last_update', 0)) / 60
        return {
            'status': 'Ready',
            'orders': orders,
            'max_order': orders[-1],
            'age_minutes': age_minutes,
        }
