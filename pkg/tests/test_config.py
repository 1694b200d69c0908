import pytest

from sagraph.config import FitConfig, load_config, read_known_effects
from sagraph.exceptions import ConfigurationError
from sagraph.params import KnownMask, Triangular


def test_defaults():
    cfg = FitConfig()
    assert (cfg.iterations, cfg.burn_in, cfg.mh_step, cfg.max_redraws) == (2000, 1000, 0.1, 100)
    assert (cfg.kappa, cfg.b0, cfg.b1, cfg.tau, cfg.level) == (0.1, 0.01, 0.01, 0.001, 0.5)


def test_toml_sections(tmp_path):
    (tmp_path / "known.csv").write_text(
        "k,i,j,mean,sd\n" + "".join(f"{k},{i},{j},1,0.01\n" for k in (1, 2) for i in (1, 2) for j in (1, 2, 3))
    )
    (tmp_path / "fit.toml").write_text(
        'seed = 7\n[sampler]\niterations = 50\nburn_in = 10\n'
        '[prior]\nkind = "normal-gamma"\nkappa = 0.2\n'
        '[restriction]\nkind = "known-mask"\nknown_effects = "known.csv"\n'
        '[selection]\nlevel = 0.9\n'
    )
    cfg, seed = load_config(tmp_path / "fit.toml")
    assert seed == 7 and cfg.iterations == 50 and cfg.prior == "normal-gamma" and cfg.kappa == 0.2
    assert cfg.level == 0.9 and len(cfg.known_effects) == 12
    assert isinstance(cfg.build_restriction(3), KnownMask)


def test_unknown_keys_rejected(tmp_path):
    (tmp_path / "a.toml").write_text("[sampler]\nwarmup = 3\n")
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "a.toml")
    (tmp_path / "b.toml").write_text("[tuning]\nx = 1\n")
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "b.toml")


def test_invalid_values():
    with pytest.raises(ConfigurationError):
        FitConfig(iterations=10, burn_in=10)
    with pytest.raises(ConfigurationError):
        FitConfig(prior="laplace")
    with pytest.raises(ConfigurationError):
        FitConfig(restriction="known-mask")


def test_hashes():
    a = FitConfig()
    b = a.updated(iterations=5000, mh_step=0.2)
    assert a.hash() != b.hash() and a.model_hash() == b.model_hash()
    assert a.model_hash() != a.updated(restriction="triangular").model_hash()
    assert FitConfig.from_dict(b.to_dict()) == b


def test_restriction_builder():
    r = FitConfig(restriction="triangular", orientation="lower").build_restriction(3)
    assert r == Triangular("lower")


def test_bad_known_effects(tmp_path):
    (tmp_path / "k.csv").write_text("1,1,2,0.5\n")
    with pytest.raises(ConfigurationError):
        read_known_effects(tmp_path / "k.csv")
