from nlsched.cli import main

main()
