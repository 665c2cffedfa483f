import csv
import json

import numpy as np
import pytest

from cli import main
from config import RunConfig
from container import read_container, write_container


def run_pipeline(tmp_path, iters=3):
    files = {name: str(tmp_path / f'{name}.bcs') for name in ('image', 'mask', 'kspace', 'zf', 'rec', 'W')}
    files['trace'] = str(tmp_path / 'trace.csv')
    files['metrics'] = str(tmp_path / 'metrics.json')
    assert main(['phantom', '--kind', 'smooth-blobs', '--shape', '16x16', '--seed', '1',
                 '--out', files['image']]) == 0
    assert main(['mask', '--shape', '16x16', '--accel', '2.5', '--center', '2', '--seed', '0',
                 '--out', files['mask']]) == 0
    assert main(['simulate', '--image', files['image'], '--mask', files['mask'], '--noise-std', '0.01',
                 '--seed', '5', '--out', files['kspace']]) == 0
    assert main(['zerofill', '--kspace', files['kspace'], '--mask', files['mask'], '--out', files['zf']]) == 0
    assert main(['reconstruct', '--kspace', files['kspace'], '--mask', files['mask'], '--patch', '4',
                 '--iters', str(iters), '--ref', files['image'], '--trace', files['trace'],
                 '--save-transform', files['W'], '--out', files['rec']]) == 0
    assert main(['metrics', '--recon', files['rec'], '--ref', files['image'], '--out', files['metrics']]) == 0
    return files


def test_pipeline(tmp_path, capsys):
    files = run_pipeline(tmp_path)
    out = capsys.readouterr().out
    assert 'm = 102' in out

    with open(files['trace'], newline='') as f:
        rows = list(csv.DictReader(f))
    assert [int(r['iter']) for r in rows] == [0, 1, 2, 3]
    objective = [float(r['objective']) for r in rows]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(objective, objective[1:]))
    assert all(np.isfinite(float(r['psnr'])) for r in rows)

    assert read_container(files['W'], 'matrix').shape == (16, 16)
    assert read_container(files['rec'], 'image').shape == (16, 16)
    with open(files['metrics']) as f:
        assert set(json.load(f)) == {'psnr_db', 'hfen'}


def test_pipeline_is_deterministic(tmp_path):
    (tmp_path / 'a').mkdir()
    (tmp_path / 'b').mkdir()
    first = run_pipeline(tmp_path / 'a')
    second = run_pipeline(tmp_path / 'b')
    for key in first:
        with open(first[key], 'rb') as f, open(second[key], 'rb') as g:
            assert f.read() == g.read(), key


def test_zero_iterations_return_zero_filling(tmp_path):
    files = run_pipeline(tmp_path, iters=0)
    assert np.array_equal(read_container(files['rec'], 'image'), read_container(files['zf'], 'image'))


def test_full_mask_simulate_zerofill_round_trip(tmp_path):
    image, mask, kspace, zf = (str(tmp_path / n) for n in ('x.bcs', 'm.bcs', 'k.bcs', 'z.bcs'))
    assert main(['phantom', '--shape', '8x8', '--out', image]) == 0
    write_container(mask, np.ones((8, 8), dtype=bool), 'mask')
    assert main(['simulate', '--image', image, '--mask', mask, '--out', kspace]) == 0
    assert main(['zerofill', '--kspace', kspace, '--mask', mask, '--out', zf]) == 0
    assert np.allclose(read_container(zf), read_container(image), atol=1e-12)


def test_metrics_of_identical_images(tmp_path, capsys):
    image = str(tmp_path / 'x.bcs')
    main(['phantom', '--shape', '16x16', '--out', image])
    capsys.readouterr()
    assert main(['metrics', '--recon', image, '--ref', image]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report == {'psnr_db': float('inf'), 'hfen': 0.0}


def test_config_file_and_overrides(tmp_path):
    files = run_pipeline(tmp_path, iters=1)
    config = RunConfig(kspace=files['kspace'], mask=files['mask'], out=str(tmp_path / 'cfg.bcs'),
                       patch=4, iters=2, algo='a3', eta=0.05)
    config.to_json(tmp_path / 'run.json')
    dump = tmp_path / 'resolved.json'
    assert main(['reconstruct', '--config', str(tmp_path / 'run.json'), '--iters', '1',
                 '--dump-config', str(dump)]) == 0
    resolved = RunConfig.from_json(dump)
    assert resolved.iters == 1
    assert resolved.algo == 'a3' and resolved.patch == 4


def test_usage_errors(tmp_path, capsys):
    assert main(['mask', '--shape', '16x16', '--accel', '1.0', '--out', str(tmp_path / 'm.bcs')]) == 2
    assert '[!]' in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(['mask', '--shape', '16by16', '--accel', '2', '--out', str(tmp_path / 'm.bcs')])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(['reconstruct', '--mask', str(tmp_path / 'm.bcs')])


def test_data_errors(tmp_path):
    files = run_pipeline(tmp_path, iters=0)
    missing = str(tmp_path / 'missing.bcs')
    assert main(['simulate', '--image', missing, '--mask', files['mask'], '--out', missing]) == 3
    # a mask container where an image is expected
    assert main(['simulate', '--image', files['mask'], '--mask', files['mask'], '--out', missing]) == 3


def test_a3_without_threshold(tmp_path):
    files = run_pipeline(tmp_path, iters=0)
    assert main(['reconstruct', '--kspace', files['kspace'], '--mask', files['mask'], '--algo', 'a3',
                 '--out', str(tmp_path / 'r.bcs')]) == 2


def test_mask_parameter_errors(tmp_path, capsys):
    out = str(tmp_path / 'm.bcs')
    assert main(['mask', '--shape', '16x16', '--accel', '2', '--center', '2', '--density-power', '5000',
                 '--out', out]) == 2
    assert 'too steep' in capsys.readouterr().err
    assert main(['mask', '--shape', '16x16', '--accel', '2', '--center', '2', '--density-power', '400',
                 '--out', out]) == 0
    assert main(['mask', '--shape', '32x32', '--scheme', 'cartesian', '--accel', '4', '--center', '2.5',
                 '--out', out]) == 2
    assert main(['mask', '--shape', '32x32', '--scheme', 'cartesian', '--accel', '4', '--center', '4',
                 '--out', out]) == 0


def test_non_finite_config_value(tmp_path):
    files = run_pipeline(tmp_path, iters=0)
    config = tmp_path / 'run.json'
    config.write_text('{"iters": Infinity}')
    assert main(['reconstruct', '--config', str(config), '--kspace', files['kspace'], '--mask', files['mask'],
                 '--out', str(tmp_path / 'r.bcs')]) == 3
