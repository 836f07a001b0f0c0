import check_system


def test_check_config_accepts_reference(write_config, capsys):
    assert check_system.check_config(write_config())
    assert "dose interval" in capsys.readouterr().out


def test_check_config_reports_bad_file(tmp_path, capsys):
    assert not check_system.check_config(str(tmp_path / "absent.json"))
    assert "could not read" in capsys.readouterr().out


def test_check_libraries():
    assert check_system.check_libraries()
