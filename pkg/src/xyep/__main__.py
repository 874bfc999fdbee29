from xyep.cli import main

main()
