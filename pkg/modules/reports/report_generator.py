"""
Report generation for rank-correlation results.

Turns evaluation, inversion and estimation outcomes into JSON-ready dicts,
curves into full-precision CSV, and self-test outcomes into a text report.
"""

from datetime import datetime
from pathlib import Path
import json
import logging

from rich.table import Table

from config.copula_constants import CSV_FLOAT_FORMAT
from config.settings import REPORT_OUTPUT_DIR
from modules.rankcorr.copula_spec import copula_spec_to_document

logger = logging.getLogger(__name__)


class ReportGenerator:
    """Render and save rank-correlation reports."""

    def __init__(self, output_dir=None):
        """
        Initialize report generator.

        Args:
            output_dir: Directory for saved reports, REPORT_OUTPUT_DIR if omitted;
                created on first save
        """
        self.output_dir = Path(output_dir) if output_dir is not None else REPORT_OUTPUT_DIR

    def result_payload(self, result, spec):
        """
        JSON payload for one rank correlation value.

        Args:
            result: RankResult
            spec: CopulaSpec that was evaluated

        Returns:
            Dict with measure, value, std_error, method and spec_echo
        """
        return {
            'measure': result.measure.value,
            'value': result.value,
            'std_error': result.std_error,
            'method': result.method.value,
            'spec_echo': copula_spec_to_document(spec),
        }

    def eval_payload(self, results, spec):
        """Single result object, or a list when several measures were requested."""
        payloads = [self.result_payload(result, spec) for result in results]
        return payloads[0] if len(payloads) == 1 else payloads

    def invert_payload(self, estimate, spec):
        """
        JSON payload for a single-moment inversion.

        Args:
            estimate: EstimateResult
            spec: CopulaSpec giving family, skew and mixing

        Returns:
            Report dict
        """
        document = copula_spec_to_document(spec)
        document.pop('rho')
        return {
            'measure': estimate.measure.value,
            'target': estimate.target,
            'rho_hat': estimate.rho_hat,
            'residual': estimate.residual,
            'iterations': estimate.iterations,
            'bracket': list(estimate.bracket),
            'attainable': list(estimate.attainable),
            'spec_echo': document,
        }

    def equi_skew_payload(self, outcome, target_tau, target_rho_s, spec):
        """JSON payload for the two-moment equi-skew inversion."""
        document = copula_spec_to_document(spec)
        document.pop('rho')
        document.pop('skew')
        return {
            'target_tau': target_tau,
            'target_rhos': target_rho_s,
            'rho_hat': outcome.rho_hat,
            'skew_hat': outcome.skew_hat,
            'residuals': list(outcome.residuals),
            'iterations': outcome.iterations,
            'roots_found': outcome.roots_found,
            'probe': [{'skew': level, 'residual': gap} for level, gap in outcome.probe],
            'spec_echo': document,
        }

    def estimate_payload(self, outcome, spec, data_path):
        """
        JSON payload for estimation from data.

        Args:
            outcome: Dict returned by MomentEstimator.estimate_from_sample
            spec: CopulaSpec giving family, skew and mixing
            data_path: Source CSV

        Returns:
            Report dict
        """
        document = copula_spec_to_document(spec)
        document.pop('rho')
        return {
            'data': str(data_path),
            'n': outcome['n'],
            'tau': outcome['tau'],
            'rhos': outcome['rhos'],
            'rho_hat_tau': outcome['from_tau'].rho_hat,
            'rho_hat_rhos': outcome['from_rhos'].rho_hat,
            'discrepancy': outcome['discrepancy'],
            'spec_echo': document,
        }

    def curve_csv(self, frame):
        """
        CSV text of a curve at full double precision.

        Args:
            frame: DataFrame from rank_curve

        Returns:
            CSV text with a header row
        """
        return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')

    def selftest_report(self, level, checks):
        """
        Plain-text self-test report.

        Args:
            level: 'quick' or 'full'
            checks: List of CheckResult

        Returns:
            Report text
        """
        failed = [check for check in checks if not check.passed]

        report = []
        report.append("=" * 80)
        report.append("RANK CORRELATION SELF-TEST")
        report.append(f"Level: {level}")
        report.append(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
        report.append("=" * 80)
        report.append("")
        report.append(f"{'Check':<48} {'Tolerance':>12} {'Deviation':>12} {'Result':>6}")
        report.append("-" * 80)
        for check in checks:
            status = 'PASS' if check.passed else 'FAIL'
            report.append(f"{check.name[:48]:<48} {check.tolerance:>12.3e} {check.deviation:>12.3e} {status:>6}")
        report.append("-" * 80)
        report.append(f"  {len(checks) - len(failed)} of {len(checks)} checks passed")

        if failed:
            report.append("")
            report.append("FAILED CHECKS")
            for check in failed:
                report.append(f"  {check.name}: deviation {check.deviation:.3e} > tolerance {check.tolerance:.3e}")
        report.append("=" * 80)

        return "\n".join(report)

    def selftest_table(self, checks):
        """Rich table of self-test checks for console output."""
        table = Table(title="Self-Test")
        table.add_column("Check", style="cyan")
        table.add_column("Tolerance", style="yellow", justify="right")
        table.add_column("Deviation", style="blue", justify="right")
        table.add_column("Result")

        for check in checks:
            table.add_row(
                check.name,
                f"{check.tolerance:.3e}",
                f"{check.deviation:.3e}",
                "[green]PASS[/green]" if check.passed else "[red]FAIL[/red]"
            )
        return table

    def _target(self, filename):
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / filename

    def save_report(self, filename, content):
        """
        Save report to file.

        Args:
            filename: Filename (without path)
            content: Report content

        Returns:
            Path to saved file
        """
        filepath = self._target(filename)

        try:
            with open(filepath, 'w', newline='') as f:
                f.write(content)
            logger.info(f"Report saved to: {filepath}")
            return filepath
        except Exception as e:
            logger.error(f"Failed to save report: {e}")
            raise

    def save_curve(self, filename, frame):
        """Save a curve DataFrame as CSV."""
        return self.save_report(filename, self.curve_csv(frame))

    def save_json_report(self, filename, data):
        """
        Save report data as JSON.

        Args:
            filename: Filename (without path)
            data: Data to save

        Returns:
            Path to saved file
        """
        filepath = self._target(filename)

        try:
            with open(filepath, 'w') as f:
                json.dump(data, f, indent=2, default=str)
            logger.info(f"JSON report saved to: {filepath}")
            return filepath
        except Exception as e:
            logger.error(f"Failed to save JSON report: {e}")
            raise
