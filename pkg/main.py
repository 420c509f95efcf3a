import sys

from provider.ciuav import CiuavCli

cli = CiuavCli()

if __name__ == '__main__':
    sys.exit(cli.run(sys.argv[1:]))
