"""
Command-line front end for topological-gradient inclusion detection.

Commands:
    mesh         generate and save the reconstruction mesh
    generate     simulate boundary measurements for a planted inclusion
    reconstruct  run alg1 / alg2 / alg3 on the measurements of a run directory
    validate     compare the topological gradient with brute-force trial inclusions
    campaign     repeat noisy reconstructions over many seeds

Exit codes: 0 success, 1 solver / IO / configuration error, 2 detection on the boundary.
"""
import argparse
import logging
import sys
import time
from typing import Callable, Dict, List, Optional

from config import RunConfig, parse_override_args
from converters import OutputConverter
from exceptions import ConfigError, ToolkitError
from file_manager import RunFileManager
from meshing import Mesh, generate_disk_mesh, load_mesh, save_mesh
from reconstruction import AlgorithmManager, Measurement, split_measurement
from synth import (ORACLE_CONVENTIONS, CampaignConfig, OracleSetup, boundary_perturbation_order,
                   generate_measurement, oracle_topological_gradient, run_campaign)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BOUNDARY = 2


def reconstruction_mesh(config: RunConfig) -> Mesh:
    if config.mesh.file:
        return load_mesh(config.mesh.file)
    return generate_disk_mesh(config.mesh.h, config.mesh.seed)


def generator_mesh(config: RunConfig, recon: Mesh) -> Mesh:
    """Finer mesh with its own seed; the reconstruction mesh itself when refinement is 1 and seeds agree."""
    if config.mesh.gen_refinement == 1.0 and config.mesh.gen_seed == config.mesh.seed:
        return recon
    return generate_disk_mesh(config.mesh.h / config.mesh.gen_refinement, config.mesh.gen_seed)


def cmd_mesh(config: RunConfig, args: argparse.Namespace) -> int:
    files = RunFileManager(config.output.dir)
    mesh = generate_disk_mesh(config.mesh.h, config.mesh.seed)
    path = save_mesh(mesh, files.path("mesh.txt"))
    print(f"✅ Mesh {mesh.mesh_id}: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles -> {path}")
    return EXIT_OK


def cmd_generate(config: RunConfig, args: argparse.Namespace) -> int:
    start = time.time()
    files = RunFileManager(config.output.dir)
    recon = reconstruction_mesh(config)
    gen = generator_mesh(config, recon)
    inclusion = config.inclusion_spec()
    sources = config.source_terms()
    mask = config.boundary_partition()
    newton = config.newton_config()

    measurements = []
    noise_specs = []
    for stream, f in enumerate(sources):
        noise = config.noise_spec(stream=stream)
        measurements.append(generate_measurement(inclusion, f, gen, recon, mask, noise, newton,
                                                 config.model.min_separation))
        noise_specs.append(noise.to_dict() if noise is not None else None)
        print(f"✅ Generated {f.key}: {len(recon.boundary_nodes)} boundary values")

    extra = {
        'truth': inclusion.to_dict() if inclusion is not None else None,
        'generator_mesh_id': gen.mesh_id,
        'noise': noise_specs if any(noise_specs) else 'none',
    }
    manifest = files.write_measurements(recon, measurements, config.to_dict(), extra)
    files.write_report("generate", {'config': config.to_dict(), 'manifest': manifest.name},
                       {'total': time.time() - start})
    print(f"✅ Manifest written to {manifest}")
    storage = files.get_storage_info()
    print(f"📁 {storage['total_files']} files, {storage['total_size_mb']} MB in {storage['output_dir']}")
    return EXIT_OK


def _select_measurements(name: str, measurements: List[Measurement]) -> List[Measurement]:
    if name == "alg1":
        return measurements[:1]
    if name == "alg3":
        return split_measurement(measurements[0])
    return measurements


def cmd_reconstruct(config: RunConfig, args: argparse.Namespace) -> int:
    start = time.time()
    files = RunFileManager(config.output.dir)
    recon = reconstruction_mesh(config)
    manifest = files.read_manifest()
    measurements = _select_measurements(config.algorithm.name, files.load_measurements(recon))

    manager = AlgorithmManager()
    payload = manager.reconstruct(config.algorithm.name, recon, measurements, config.reconstruction_config(),
                                  incremental=config.algorithm.incremental)
    if payload['error']:
        stage = f" during {payload['stage']}" if payload['stage'] else ""
        print(f"❌ Reconstruction failed{stage}: {payload['error']}")
        files.write_report("reconstruction_error", {'config': config.to_dict(), 'error': payload['error'],
                                                    'stage': payload['stage']})
        return EXIT_ERROR

    result = payload['result']
    report = {'config': config.to_dict(), 'result': result.to_dict(), 'truth': manifest.get('truth')}
    truth = manifest.get('truth')
    if truth:
        report['error_to_truth'] = result.error_to(truth['center'])
    timings = dict(result.timings)
    timings['total'] = time.time() - start
    files.write_report("reconstruction", report, timings)
    files.write_text("fields.csv", OutputConverter.fields_to_csv(
        recon, result.aggregated_field.values, [f.values for f in result.per_measurement_fields],
        config.to_dict()))
    if config.output.plot_script or args.plot_script:
        files.write_text("fields.gp", OutputConverter.convert(
            {'csv': 'fields.csv', 'center': result.detected_center}, 'gnuplot'))

    x, y = result.detected_center
    print(f"✅ Detected center ({x:.4f}, {y:.4f}) with {result.algorithm}")
    conventions = result.conventions
    print(f"   min G = {result.detection.value:.4e} ({conventions['gradient']}), "
          f"misfits {conventions['misfit']}: {', '.join(f'{j:.3e}' for j in result.misfits)}")
    if 'error_to_truth' in report:
        print(f"   Distance to planted center: {report['error_to_truth']:.4f}")
    if result.flat_field:
        print("⚠️ Flat topological gradient: the data carry no inclusion signature")
        return EXIT_OK
    if result.boundary_violation_flag:
        print("⚠️ Minimum of G detected along the boundary: reconstruction failed")
        return EXIT_BOUNDARY
    return EXIT_OK


def cmd_validate(config: RunConfig, args: argparse.Namespace) -> int:
    start = time.time()
    files = RunFileManager(config.output.dir)
    mesh = reconstruction_mesh(config)
    newton = config.newton_config()
    source = config.source_terms()[0]
    inclusion = config.inclusion_spec()
    eps = config.oracle_eps()
    points = config.oracle_points()
    if not points or not eps:
        raise ConfigError("validate needs oracle.points and oracle.eps")

    measurement = generate_measurement(inclusion, source, mesh, mesh, None, None, newton,
                                       config.model.min_separation)
    setup = OracleSetup(mesh, measurement, config.model.k_in, newton, config.model.min_separation)
    checks = []
    for z in points:
        report = oracle_topological_gradient(z, eps, setup)
        checks.append(report.to_dict())
        slope = "n/a" if report.slope is None else f"{report.slope:.3f}"
        print(f"✅ Point ({z[0]:.3f}, {z[1]:.3f}): G = {report.gradient:.4e} {ORACLE_CONVENTIONS['gradient']}, "
              f"slope {slope}, sign {'agrees' if report.sign_agrees() else 'differs'}")
    agreement = sum(p['sign_agrees'] for p in checks) / len(checks)
    order = boundary_perturbation_order(mesh, source, points[0], eps, config.model.k_in, newton,
                                        config.model.min_separation)
    print(f"✅ Sign agreement {agreement:.0%}, boundary perturbation order {order['slope']:.3f}")
    print(f"   Δj with misfit {ORACLE_CONVENTIONS['misfit']}; {ORACLE_CONVENTIONS['normalized']}")
    files.write_report("validation", {'config': config.to_dict(), 'points': checks,
                                      'conventions': ORACLE_CONVENTIONS,
                                      'sign_agreement': agreement, 'boundary_perturbation': order},
                       {'total': time.time() - start})
    return EXIT_OK


def cmd_campaign(config: RunConfig, args: argparse.Namespace) -> int:
    files = RunFileManager(config.output.dir)
    recon = reconstruction_mesh(config)
    inclusion = config.inclusion_spec()
    if inclusion is None:
        raise ConfigError("a campaign needs a planted inclusion (inclusion.shape != none)")
    campaign = CampaignConfig(
        inclusion=inclusion,
        sources=config.source_terms(),
        gen_mesh=generator_mesh(config, recon),
        recon_mesh=recon,
        noise_level=config.noise.p,
        algorithm=config.algorithm.name,
        partition=config.boundary_partition(),
        reconstruction=config.reconstruction_config(),
        incremental=config.algorithm.incremental,
        min_separation=config.model.min_separation,
    )
    base, n_runs = config.campaign.base_seed, config.campaign.n_runs
    print(f"🎲 Seeds {base}..{base + n_runs - 1}, noise p = {config.noise.p:g}")
    result = run_campaign(campaign, n_runs, base, config.campaign.workers)
    payload = result.to_dict()
    payload['config'] = config.to_dict()
    files.write_report("campaign", payload, result.timings)
    files.write_text("campaign_runs.csv", OutputConverter.runs_to_csv(result.to_dataframe(), config.to_dict()))
    mean = "n/a" if result.mean_error is None else f"{result.mean_error:.4f}"
    print(f"✅ Mean error {mean}, failure rate {result.failure_rate:.0%}, errors {result.error_count}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    'mesh': cmd_mesh,
    'generate': cmd_generate,
    'reconstruct': cmd_reconstruct,
    'validate': cmd_validate,
    'campaign': cmd_campaign,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Detect small inclusions from boundary data with the topological gradient.",
        epilog="Any configuration key can be overridden with --section.key VALUE.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="flat section.key=value configuration file")
    parser.add_argument("--output", help="run directory (same as --output.dir)")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--plot-script", action="store_true", help="write a gnuplot script next to fields.csv")
    return parser


def load_config(path: Optional[str], overrides) -> RunConfig:
    if path:
        return RunConfig.from_file(path, overrides)
    return RunConfig().update(overrides)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config, parse_override_args(rest))
        if args.output:
            config.output.dir = args.output
        return COMMANDS[args.command](config, args)
    except ToolkitError as e:
        print(f"❌ {type(e).__name__}: {e}")
        return EXIT_ERROR
    except OSError as e:
        print(f"❌ I/O error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
