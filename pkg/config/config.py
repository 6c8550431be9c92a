"""
Configuration for the tt* reconstruction toolkit
Centralized configuration management
"""

import os

from dotenv import load_dotenv

load_dotenv()


class Config:
    """Centralized configuration for the toolkit"""

    # Base directory (repository root)
    BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

    # Data files
    DATA_DIR = os.path.join(BASE_DIR, "data")
    GOLDEN_H_TABLE = os.path.join(DATA_DIR, "golden_h_table.json")
    GOLDEN_BBTILDE = os.path.join(DATA_DIR, "golden_bbtilde_blocks.json")
    CACHE_DIR = os.environ.get('TTSTAR_CACHE_DIR', os.path.join(DATA_DIR, "cache"))
    USE_CACHE = os.environ.get('TTSTAR_USE_CACHE', 'false').lower() == 'true'

    # Run defaults
    ORDER = int(os.environ.get('TTSTAR_ORDER', 6))
    FORMAT = os.environ.get('TTSTAR_FORMAT', 'pretty')
    SEED = int(os.environ.get('TTSTAR_SEED', 20240101))
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    SHOW_PROGRESS = os.environ.get('TTSTAR_PROGRESS', 'false').lower() == 'true'

    # Numerics
    EULER_GAMMA = float(os.environ.get('EULER_GAMMA', 0.5772156649015329))
    NUMERIC_TOL = float(os.environ.get('NUMERIC_TOL', 1e-10))
    INVOLUTION_TOL = float(os.environ.get('INVOLUTION_TOL', 1e-12))

    # Painleve III integration
    ODE_METHOD = os.environ.get('ODE_METHOD', 'DOP853')
    ODE_RTOL = float(os.environ.get('ODE_RTOL', 1e-11))
    ODE_ATOL = float(os.environ.get('ODE_ATOL', 1e-13))
    ODE_ANCHOR_Q = float(os.environ.get('ODE_ANCHOR_Q', 0.05))
    ODE_ANCHOR_ORDER = int(os.environ.get('ODE_ANCHOR_ORDER', 10))
    ODE_SWITCH_Q = float(os.environ.get('ODE_SWITCH_Q', 1.0))
    ODE_FAR_Q = float(os.environ.get('ODE_FAR_Q', 64.0))
    ODE_DIVERGENCE_U = float(os.environ.get('ODE_DIVERGENCE_U', 50.0))
    ODE_MIN_STEP = float(os.environ.get('ODE_MIN_STEP', 1e-14))
    # absolute tolerance on the tail branch, relative to |u| where it starts
    ODE_FAR_ATOL_SCALE = float(os.environ.get('ODE_FAR_ATOL_SCALE', 1e-12))
    ODE_FAR_MARGIN_R = float(os.environ.get('ODE_FAR_MARGIN_R', 8.0))

    # Soft acceptance for the asymptotic formula
    ASYMPTOTIC_FAIL = float(os.environ.get('ASYMPTOTIC_FAIL', 1e-3))
    ASYMPTOTIC_WARN = float(os.environ.get('ASYMPTOTIC_WARN', 1e-2))

    # Total curvature window
    CURVATURE_QMIN = float(os.environ.get('CURVATURE_QMIN', 1e-3))
    CURVATURE_QMAX = float(os.environ.get('CURVATURE_QMAX', 40.0))
    CURVATURE_EPSREL = float(os.environ.get('CURVATURE_EPSREL', 1e-10))

    @classmethod
    def ensure_directories(cls):
        """Ensure all required directories exist"""
        os.makedirs(cls.DATA_DIR, exist_ok=True)
        os.makedirs(cls.CACHE_DIR, exist_ok=True)

    @classmethod
    def tolerances(cls):
        """Named tolerances that `--tol name=value` may override"""
        return {
            'numeric': cls.NUMERIC_TOL,
            'involution': cls.INVOLUTION_TOL,
            'ode_rtol': cls.ODE_RTOL,
            'ode_atol': cls.ODE_ATOL,
            'asymptotic_fail': cls.ASYMPTOTIC_FAIL,
            'asymptotic_warn': cls.ASYMPTOTIC_WARN,
            'curvature_epsrel': cls.CURVATURE_EPSREL,
        }


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = 'DEBUG'
    SHOW_PROGRESS = True


class ProductionConfig(Config):
    """Production configuration"""
    LOG_LEVEL = 'WARNING'
    USE_CACHE = True


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    LOG_LEVEL = 'DEBUG'
    SHOW_PROGRESS = False
    USE_CACHE = False


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config():
    """Get configuration based on environment"""
    env = os.environ.get('TTSTAR_ENV', 'development')
    return config.get(env, config['default'])
