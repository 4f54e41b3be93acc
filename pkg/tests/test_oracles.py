from synth_files.oracles import OracleHandle
from synth_files.values import Dual, Int
from synth_files.errors import OracleDomainError, OracleError
import subprocess
import unittest
import unittest.mock


def _completed(stdout="", returncode=0, stderr=""):
    return subprocess.CompletedProcess(args="oracle", returncode=returncode, stdout=stdout, stderr=stderr)


class TestOracles(unittest.TestCase):

    # Setup tests with an external oracle handle
    def setUp(self):
        self.cmd = OracleHandle.parse("cmd:./oracle.sh", timeout=2.0)
        return super().setUp()

    # Spec strings name the kind and target
    def test_parse(self):
        handle = OracleHandle.parse("builtin:forward-diff")
        self.assertEqual(handle.kind, "builtin")
        self.assertEqual(handle.spec, "builtin:forward-diff")
        self.assertEqual(self.cmd.target, "./oracle.sh")

    # Malformed specs and unknown builtins are rejected
    def test_parse_errors(self):
        for spec in ["forward-diff", "builtin:", "builtin:nope", "http:localhost", "cmd:  "]:
            with self.subTest(spec=spec):
                with self.assertRaises(ValueError):
                    OracleHandle.parse(spec)

    # Builtin answers are cached per input and context
    def test_builtin_cache(self):
        handle = OracleHandle.parse("builtin:forward-diff")
        self.assertEqual(handle.query("x*x", {"x": Int(4)}), Dual(16.0, 8.0))
        handle.query("x*x", {"x": Int(4)})
        self.assertEqual(handle.queries, 1)
        handle.query("x*x", {"x": Int(3)})
        self.assertEqual(handle.queries, 2)

    # Builtin domain errors stay distinguishable
    def test_builtin_domain_error(self):
        handle = OracleHandle.parse("builtin:calc")
        with self.assertRaises(OracleDomainError):
            handle.query("1 / 0", {})

    # The external protocol sends input and context as one JSON object
    def test_cmd_query(self):
        with unittest.mock.patch("synth_files.oracles.subprocess.run", return_value=_completed('{"dual":[26.0,10.0]}\n')) as run:
            value = self.cmd.query("x^2+4*x+5", {"x": Int(3)})
        self.assertEqual(value, Dual(26.0, 10.0))
        kwargs = run.call_args.kwargs
        self.assertEqual(kwargs["input"], '{"input": "x^2+4*x+5", "context": {"x": {"int": 3}}}')
        self.assertEqual(kwargs["timeout"], 2.0)
        self.assertTrue(kwargs["shell"])

    # A nonzero exit status is a protocol error carrying the request
    def test_cmd_nonzero(self):
        with unittest.mock.patch("synth_files.oracles.subprocess.run", return_value=_completed(returncode=4, stderr="boom\n")):
            with self.assertRaises(OracleError) as ctx:
                self.cmd.query("x", {"x": Int(1)})
        self.assertIn("status 4", str(ctx.exception))
        self.assertIn("boom", str(ctx.exception))
        self.assertEqual(ctx.exception.request["input"], "x")

    # Replies that are not Value JSON are protocol errors
    def test_cmd_malformed(self):
        for reply in ["", "26", '{"int":1.5}', "not json"]:
            with self.subTest(reply=reply):
                handle = OracleHandle.parse("cmd:./oracle.sh")
                with unittest.mock.patch("synth_files.oracles.subprocess.run", return_value=_completed(reply)):
                    with self.assertRaises(OracleError):
                        handle.query("x", {"x": Int(1)})

    # Timeouts are protocol errors
    def test_cmd_timeout(self):
        with unittest.mock.patch(
            "synth_files.oracles.subprocess.run",
            side_effect=subprocess.TimeoutExpired(cmd="./oracle.sh", timeout=2.0),
        ):
            with self.assertRaises(OracleError) as ctx:
                self.cmd.query("x", {"x": Int(1)})
        self.assertIn("timed out", str(ctx.exception))
