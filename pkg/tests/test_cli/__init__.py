# test_cli package
