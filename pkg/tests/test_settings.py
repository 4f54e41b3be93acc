from synth_files.settings import Settings, env_flag, load_settings
from pydantic import ValidationError
import os
import unittest
import unittest.mock


class TestSettings(unittest.TestCase):

    # Setup tests with a clean AGSYNTH environment
    def setUp(self):
        self.env = {k: v for k, v in os.environ.items() if not k.startswith("AGSYNTH_")}
        return super().setUp()

    # Unset variables keep the defaults
    def test_defaults(self):
        with unittest.mock.patch.dict(os.environ, self.env, clear=True):
            settings = load_settings()
        self.assertEqual(settings, Settings())
        self.assertEqual(settings.budget().max_size, 16)
        self.assertEqual(settings.budget().max_candidates, 1_000_000)
        self.assertEqual(settings.bounds().strings, 24)
        self.assertTrue(settings.bounds().hole_pairs)
        self.assertFalse(settings.debug)

    # Variables override the defaults
    def test_overrides(self):
        env = {**self.env, "AGSYNTH_DSL_SIZE_MAX": "9", "AGSYNTH_SEED": "7", "AGSYNTH_TOL": "0.01", "AGSYNTH_DEBUG": "Yes", "AGSYNTH_VALIDATION_PAIRS": "no"}
        with unittest.mock.patch.dict(os.environ, env, clear=True):
            settings = load_settings()
        self.assertEqual(settings.dsl_size_max, 9)
        self.assertEqual(settings.budget().seed, 7)
        self.assertEqual(settings.tol, 0.01)
        self.assertTrue(settings.debug)
        self.assertFalse(settings.bounds().hole_pairs)

    # Invalid values are rejected
    def test_invalid(self):
        for var, value in [("AGSYNTH_DSL_SIZE_MAX", "0"), ("AGSYNTH_TOL", "-1"), ("AGSYNTH_SEED", "seven")]:
            with self.subTest(var=var):
                with unittest.mock.patch.dict(os.environ, {**self.env, var: value}, clear=True):
                    with self.assertRaises(ValidationError):
                        load_settings()

    # Boolean flags
    def test_env_flag(self):
        with unittest.mock.patch.dict(os.environ, {**self.env, "AGSYNTH_DEBUG": "0"}, clear=True):
            self.assertFalse(env_flag("AGSYNTH_DEBUG", True))
            self.assertTrue(env_flag("AGSYNTH_UNSET", True))
