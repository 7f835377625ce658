from bvp3eig.cli import main

main()
