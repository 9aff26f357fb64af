from hetcache.cli import main

main()
